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

#ifndef DEGTA_GRADCHECK_HPP
#define DEGTA_GRADCHECK_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "degta/autograd.hpp"

namespace degta {

/// Scalar-valued computation over a list of input tensors (all on one tape).
using ScalarFn = std::function<ad::Tensor(ad::Tape&, std::span<const ad::Tensor>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
  /// Closest approach of any non-smooth op input to its kink.
  double kink_distance = 0.0;
};

/// Denominator floor of the relative error. Central differences at eps=1e-5
/// carry round-off near 1e-11, so gradients that are exactly zero would
/// otherwise report relative errors near 1.
inline constexpr double kRelativeFloor = 1e-5;

/// Compares reverse-mode gradients of f against central differences
/// (f(x+eps) - f(x-eps)) / 2eps, entry by entry over every input. The error
/// of one entry is |a - n| / max(|a| + |n|, kRelativeFloor); the maximum is
/// returned.
/// Throws ErrorKind::kNumeric on non-finite outputs.
GradCheckResult grad_check(const ScalarFn& f, const std::vector<Matrix>& inputs, double eps = 1e-5);

/// Same, but the finite differences are taken of `reference`. Used for
/// operations whose backward is defined by a surrogate (straight-through,
/// stop-gradient).
GradCheckResult grad_check(const ScalarFn& analytic, const ScalarFn& reference, const std::vector<Matrix>& inputs,
                           double eps = 1e-5);

struct GradCheckLine {
  std::string component;
  GradCheckResult result;
};

struct GradCheckSuiteReport {
  std::vector<GradCheckLine> lines;
  double max_rel_error = 0.0;
  double seconds = 0.0;
  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Full finite-difference suite: every autograd primitive, the local and
/// global attention pipelines, the encoding-to-loss paths for every PE/SE
/// strategy, and a complete two-layer model with loss on a random 12-node
/// graph.
GradCheckSuiteReport run_gradcheck_suite(double eps, std::uint64_t seed);

}  // namespace degta

#endif  // DEGTA_GRADCHECK_HPP
