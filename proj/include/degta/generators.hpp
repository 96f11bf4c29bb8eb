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

// Synthetic graphs. Every generator is a pure function of its arguments.

#ifndef DEGTA_GENERATORS_HPP
#define DEGTA_GENERATORS_HPP

#include <cstdint>

#include "degta/graph.hpp"

namespace degta {

struct SbmParams {
  std::size_t nodes = 60;
  int blocks = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  double noise = 0.5;  ///< std-dev of the Gaussian added to one-hot block features
};

/// Stochastic block model with contiguous blocks. Labels are block ids;
/// features are one-hot block indicators plus noise; splits are a seeded
/// 60/20/20 shuffle.
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

/// Cycle C_n with a constant scalar feature.
Graph generate_cycle(std::size_t n);

/// `count` disjoint copies of C_n.
Graph generate_disjoint_cycles(std::size_t n, std::size_t count);

/// Circular skip-link graph: C_n plus chords i -- i+skip (mod n).
Graph generate_csl(std::size_t n, std::size_t skip);

/// Erdos-Renyi G(n, p) with standard-normal features of width feature_dim.
Graph generate_random_graph(std::size_t n, double p, std::size_t feature_dim, std::uint64_t seed);

}  // namespace degta

#endif  // DEGTA_GENERATORS_HPP
