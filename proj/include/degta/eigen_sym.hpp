// Copyright 2026 The degta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEGTA_EIGEN_SYM_HPP
#define DEGTA_EIGEN_SYM_HPP

#include <vector>

#include "degta/matrix.hpp"

namespace degta {

struct SymmetricEigen {
  std::vector<double> values;  ///< ascending
  Matrix vectors;              ///< column k is the unit eigenvector of values[k]
};

/// Cyclic Jacobi rotations on a dense symmetric matrix. Throws
/// ErrorKind::kNumeric if the off-diagonal mass has not vanished after
/// max_sweeps.
SymmetricEigen symmetric_eigen(const Matrix& a, int max_sweeps = 100);

}  // namespace degta

#endif  // DEGTA_EIGEN_SYM_HPP
