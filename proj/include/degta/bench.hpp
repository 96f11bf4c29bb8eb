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

#ifndef DEGTA_BENCH_HPP
#define DEGTA_BENCH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace degta {

struct BenchOptions {
  std::size_t min_n = 64;
  std::size_t max_n = 512;
  double avg_degree = 8.0;
  int k = 8;
  int hidden = 32;
  /// Each timing is the best of this many batches.
  int batches = 5;
  /// Calls per batch grow until a batch takes at least this long.
  double min_batch_seconds = 0.02;
  std::uint64_t seed = 0;
};

/// Seconds per forward call of each module on a random graph of n nodes.
struct BenchRow {
  std::size_t n = 0;
  std::size_t edges = 0;
  double encode = 0.0;
  double local = 0.0;
  double global = 0.0;
};

/// Sizes double from min_n up to max_n.
std::vector<BenchRow> run_bench(const BenchOptions& opts);

}  // namespace degta

#endif  // DEGTA_BENCH_HPP
