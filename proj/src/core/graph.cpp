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

#include "degta/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "degta/error.hpp"

namespace degta {

std::size_t Graph::max_degree() const {
  std::size_t m = 0;
  for (NodeId u = 0; u < num_nodes(); ++u) m = std::max(m, degree(u));
  return m;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::with_labels(std::vector<int> labels) const {
  require(labels.empty() || labels.size() == num_nodes(), ErrorKind::kValidation, [&] {
    return "label count " + std::to_string(labels.size()) + " does not match node count " + std::to_string(num_nodes());
  });
  Graph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

Graph Graph::with_splits(Splits splits) const {
  Graph g = *this;
  g.splits_ = std::move(splits);
  validate_splits(g);
  return g;
}

Graph Graph::with_features(Matrix features) const {
  require(features.rows() == num_nodes(), ErrorKind::kValidation, [&] {
    return "feature rows " + std::to_string(features.rows()) + " do not match node count " +
           std::to_string(num_nodes());
  });
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

GraphBuild build_graph(std::size_t num_nodes, std::span<const Edge> edges, Matrix features, SelfLoopPolicy policy) {
  require(num_nodes >= 1, ErrorKind::kValidation, "graph needs at least one node");
  require(features.rows() == num_nodes, ErrorKind::kValidation, [&] {
    return "feature matrix has " + std::to_string(features.rows()) + " rows, expected " + std::to_string(num_nodes);
  });

  GraphBuild out;
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    require(u < num_nodes && v < num_nodes, ErrorKind::kValidation, [&] {
      return "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range for " +
             std::to_string(num_nodes) + " nodes";
    });
    if (u == v) {
      require(policy == SelfLoopPolicy::kDrop, ErrorKind::kValidation,
              [&] { return "self-loop on node " + std::to_string(u); });
      ++out.dropped_self_loops;
      continue;
    }
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph& g = out.graph;
  g.offsets_.assign(num_nodes + 1, 0);
  for (const auto& e : directed) ++g.offsets_[e.first + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.indices_.reserve(directed.size());
  for (const auto& e : directed) g.indices_.push_back(e.second);
  g.features_ = std::move(features);
  return out;
}

DerivedMatrices derive_matrices(const Graph& g) {
  const std::size_t n = g.num_nodes();
  DerivedMatrices d;
  d.degree.resize(n);
  std::vector<double> inv_sqrt(n);
  for (NodeId u = 0; u < n; ++u) {
    d.degree[u] = g.degree(u);
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(d.degree[u] + 1));
  }
  d.rw_normalized = Matrix(n, n);
  d.sym_laplacian = Matrix(n, n);
  for (NodeId u = 0; u < n; ++u) {
    const double inv_deg = 1.0 / static_cast<double>(d.degree[u] + 1);
    d.rw_normalized(u, u) = inv_deg;
    // Diagonal of L~ is (deg+1) - 1 = deg.
    d.sym_laplacian(u, u) = static_cast<double>(d.degree[u]) * inv_sqrt[u] * inv_sqrt[u];
    for (NodeId v : g.neighbors(u)) {
      d.rw_normalized(u, v) = inv_deg;
      d.sym_laplacian(u, v) = -inv_sqrt[u] * inv_sqrt[v];
    }
  }
  return d;
}

std::vector<int> bfs_distances(const Graph& g, NodeId source, int cap) {
  require(source < g.num_nodes(), ErrorKind::kValidation, "bfs source out of range");
  require(cap >= 1, ErrorKind::kUsage, "bfs cap must be >= 1");
  std::vector<int> dist(g.num_nodes(), kUnreached);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    if (dist[u] + 1 >= cap) continue;
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] != kUnreached) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

std::vector<NodeId> inverse_permutation(std::span<const NodeId> pi) {
  std::vector<NodeId> inv(pi.size(), 0);
  std::vector<bool> seen(pi.size(), false);
  for (std::size_t u = 0; u < pi.size(); ++u) {
    require(pi[u] < pi.size() && !seen[pi[u]], ErrorKind::kValidation, "permutation is not a bijection");
    seen[pi[u]] = true;
    inv[pi[u]] = static_cast<NodeId>(u);
  }
  return inv;
}

Graph permute(const Graph& g, std::span<const NodeId> pi) {
  const std::size_t n = g.num_nodes();
  require(pi.size() == n, ErrorKind::kValidation, "permutation length does not match node count");
  const auto inv = inverse_permutation(pi);

  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (const auto& [u, v] : g.edge_list()) edges.emplace_back(pi[u], pi[v]);

  const Matrix& x = g.features();
  Matrix px(n, x.cols());
  for (std::size_t u = 0; u < n; ++u) std::copy(x.row(inv[u]).begin(), x.row(inv[u]).end(), px.row(u).begin());

  Graph out = build_graph(n, edges, std::move(px)).graph;
  if (g.has_labels()) {
    std::vector<int> labels(n);
    for (std::size_t u = 0; u < n; ++u) labels[pi[u]] = g.labels()[u];
    out = out.with_labels(std::move(labels));
  }
  if (!g.splits().empty()) {
    auto map_set = [&](const std::vector<NodeId>& s) {
      std::vector<NodeId> m;
      m.reserve(s.size());
      for (NodeId u : s) m.push_back(pi[u]);
      return m;
    };
    out = out.with_splits({map_set(g.splits().train), map_set(g.splits().val), map_set(g.splits().test)});
  }
  return out;
}

void validate_splits(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<int> owner(n, -1);
  const std::vector<NodeId>* sets[] = {&g.splits().train, &g.splits().val, &g.splits().test};
  const char* names[] = {"train", "val", "test"};
  for (int s = 0; s < 3; ++s) {
    for (NodeId u : *sets[s]) {
      require(u < n, ErrorKind::kValidation,
              [&] { return std::string(names[s]) + " index " + std::to_string(u) + " out of range"; });
      require(owner[u] != s, ErrorKind::kValidation,
              [&] { return std::string(names[s]) + " index " + std::to_string(u) + " listed twice"; });
      require(owner[u] < 0, ErrorKind::kValidation, [&] {
        return "index " + std::to_string(u) + " appears in both " + names[owner[u]] + " and " + names[s];
      });
      owner[u] = s;
    }
  }
}

}  // namespace degta
