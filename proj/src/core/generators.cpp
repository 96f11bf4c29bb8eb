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

#include "degta/generators.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "degta/error.hpp"

namespace degta {

namespace {

void require_probability(double p, const char* what) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::kUsage,
          [&] { return std::string(what) + " must lie in [0, 1], got " + std::to_string(p); });
}

void require_cycle_length(std::size_t n) {
  require(n >= 3, ErrorKind::kUsage, [&] { return "cycle length must be >= 3, got " + std::to_string(n); });
}

Graph ring_graph(std::size_t n, std::size_t copies, std::size_t skip) {
  std::vector<Edge> edges;
  for (std::size_t c = 0; c < copies; ++c) {
    const std::size_t base = c * n;
    for (std::size_t i = 0; i < n; ++i) {
      edges.emplace_back(static_cast<NodeId>(base + i), static_cast<NodeId>(base + (i + 1) % n));
      if (skip) edges.emplace_back(static_cast<NodeId>(base + i), static_cast<NodeId>(base + (i + skip) % n));
    }
  }
  return build_graph(n * copies, edges, Matrix(n * copies, 1, 1.0)).graph;
}

}  // namespace

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  require_probability(params.p_in, "p_in");
  require_probability(params.p_out, "p_out");
  require(params.blocks >= 1, ErrorKind::kUsage, "sbm needs at least one block");
  require(params.nodes >= static_cast<std::size_t>(params.blocks), ErrorKind::kUsage,
          "sbm needs at least one node per block");
  require(params.noise >= 0.0, ErrorKind::kUsage, "noise must be >= 0");
  const std::size_t n = params.nodes;
  const auto blocks = static_cast<std::size_t>(params.blocks);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * blocks / n);

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (unit(rng) < (labels[u] == labels[v] ? params.p_in : params.p_out))
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));

  Matrix features(n, blocks);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < blocks; ++c)
      features(i, c) = (static_cast<int>(c) == labels[i] ? 1.0 : 0.0) + params.noise * gauss(rng);

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = n * 6 / 10, n_val = n * 2 / 10;
  Splits sp;
  sp.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  sp.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  sp.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* s : {&sp.train, &sp.val, &sp.test}) std::sort(s->begin(), s->end());

  return build_graph(n, edges, std::move(features)).graph.with_labels(std::move(labels)).with_splits(std::move(sp));
}

Graph generate_cycle(std::size_t n) {
  require_cycle_length(n);
  return ring_graph(n, 1, 0);
}

Graph generate_disjoint_cycles(std::size_t n, std::size_t count) {
  require_cycle_length(n);
  require(count >= 1, ErrorKind::kUsage, "need at least one cycle");
  return ring_graph(n, count, 0);
}

Graph generate_csl(std::size_t n, std::size_t skip) {
  require_cycle_length(n);
  require(skip >= 2 && skip + 2 <= n && 2 * skip != n, ErrorKind::kUsage, [&] {
    return "csl skip must satisfy 2 <= skip <= n-2 and 2*skip != n, got skip=" + std::to_string(skip) +
           " for n=" + std::to_string(n);
  });
  return ring_graph(n, 1, skip);
}

Graph generate_random_graph(std::size_t n, double p, std::size_t feature_dim, std::uint64_t seed) {
  require_probability(p, "edge probability");
  require(n >= 1 && feature_dim >= 1, ErrorKind::kUsage, "random graph needs n >= 1 and feature_dim >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (unit(rng) < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  Matrix features(n, feature_dim);
  for (double& v : features.values()) v = gauss(rng);
  return build_graph(n, edges, std::move(features)).graph;
}

}  // namespace degta
