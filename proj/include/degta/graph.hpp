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

#ifndef DEGTA_GRAPH_HPP
#define DEGTA_GRAPH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "degta/matrix.hpp"

namespace degta {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Disjoint train/val/test node (or graph) index sets.
struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  bool empty() const { return train.empty() && val.empty() && test.empty(); }
  friend bool operator==(const Splits&, const Splits&) = default;
};

enum class SelfLoopPolicy { kDrop, kReject };

struct GraphBuild;

/// Undirected simple graph: symmetric CSR adjacency without stored self-loops,
/// a dense N x d feature matrix, optional per-node labels and splits.
/// Immutable after construction.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  /// Undirected edge count (each {u,v} once).
  std::size_t num_edges() const noexcept { return indices_.size() / 2; }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  std::size_t max_degree() const;
  /// Sorted neighbor list of u.
  std::span<const NodeId> neighbors(NodeId u) const {
    return {indices_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  bool has_edge(NodeId u, NodeId v) const;

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> indices() const noexcept { return indices_; }
  const Matrix& features() const noexcept { return features_; }
  std::size_t feature_dim() const noexcept { return features_.cols(); }

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const Splits& splits() const noexcept { return splits_; }

  /// Canonical undirected edge list with u < v, sorted.
  std::vector<Edge> edge_list() const;

  Graph with_labels(std::vector<int> labels) const;
  Graph with_splits(Splits splits) const;
  Graph with_features(Matrix features) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend GraphBuild build_graph(std::size_t, std::span<const Edge>, Matrix, SelfLoopPolicy);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> indices_;
  Matrix features_;
  std::vector<int> labels_;
  Splits splits_;
};

struct GraphBuild {
  Graph graph;
  std::size_t dropped_self_loops = 0;
};

/// Builds a symmetric CSR graph. Duplicate and reversed edges collapse to one.
/// Throws on out-of-range indices or a feature matrix with a row count other
/// than num_nodes. Self-loops are dropped (and counted) or rejected.
GraphBuild build_graph(std::size_t num_nodes, std::span<const Edge> edges, Matrix features,
                       SelfLoopPolicy policy = SelfLoopPolicy::kDrop);

/// Matrices derived from the self-looped adjacency A + I.
struct DerivedMatrices {
  std::vector<std::size_t> degree;  ///< degree without the self-loop
  Matrix rw_normalized;             ///< (D+I)^-1 (A+I), row-stochastic
  Matrix sym_laplacian;             ///< (D+I)^-1/2 ((D+I) - (A+I)) (D+I)^-1/2
};

DerivedMatrices derive_matrices(const Graph& g);

/// Marker for nodes at hop distance >= cap (or unreachable).
inline constexpr int kUnreached = -1;

/// Hop distances from source; entries with distance >= cap are kUnreached.
std::vector<int> bfs_distances(const Graph& g, NodeId source, int cap);

/// Relabels node u as pi[u]. Features, labels and split indices follow.
Graph permute(const Graph& g, std::span<const NodeId> pi);

std::vector<NodeId> inverse_permutation(std::span<const NodeId> pi);

/// Checks that split sets are in range and pairwise disjoint.
void validate_splits(const Graph& g);

}  // namespace degta

#endif  // DEGTA_GRAPH_HPP
