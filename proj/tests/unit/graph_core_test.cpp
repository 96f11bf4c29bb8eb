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

#include <cmath>
#include <numeric>

#include "degta/error.hpp"
#include "degta/generators.hpp"
#include "degta/graph.hpp"
#include "doctest.h"
#include "oracles.hpp"

using degta::Edge;
using degta::Graph;
using degta::Matrix;
using degta::NodeId;

namespace {

Graph k2() { return oracle::graph_from_edges(2, {{0, 1}}); }

Graph two_triangles() { return oracle::graph_from_edges(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}); }

}  // namespace

TEST_SUITE("graph-core") {
  TEST_CASE("build_graph degrees and symmetry collapse") {
    CHECK(k2().degree(0) == 1);
    CHECK(k2().degree(1) == 1);

    const Graph c6 = degta::generate_cycle(6);
    for (NodeId u = 0; u < 6; ++u) CHECK(c6.degree(u) == 2);

    const Graph twice = oracle::graph_from_edges(2, {{0, 1}, {1, 0}, {0, 1}});
    CHECK(twice.num_edges() == 1);
    CHECK(twice.degree(0) == 1);
    CHECK(twice.degree(1) == 1);
    CHECK(twice == k2());
  }

  TEST_CASE("build_graph drops or rejects self-loops") {
    const std::vector<Edge> edges{{0, 0}, {0, 1}, {1, 1}};
    const auto built = degta::build_graph(2, edges, Matrix(2, 1));
    CHECK(built.dropped_self_loops == 2);
    CHECK(built.graph.num_edges() == 1);
    CHECK_FALSE(built.graph.has_edge(0, 0));
    CHECK_THROWS_AS(degta::build_graph(2, edges, Matrix(2, 1), degta::SelfLoopPolicy::kReject), degta::Error);
  }

  TEST_CASE("build_graph input errors") {
    const std::vector<Edge> out_of_range{{0, 2}};
    CHECK_THROWS_AS(degta::build_graph(2, out_of_range, Matrix(2, 1)), degta::Error);
    const std::vector<Edge> ok{{0, 1}};
    CHECK_THROWS_AS(degta::build_graph(2, ok, Matrix(3, 1)), degta::Error);
    CHECK_THROWS_AS(degta::build_graph(0, {}, Matrix()), degta::Error);
  }

  TEST_CASE("derived matrices of K2 and C3") {
    const auto d = degta::derive_matrices(k2());
    CHECK(d.degree == std::vector<std::size_t>{1, 1});
    CHECK(d.rw_normalized == Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
    CHECK(degta::max_abs_diff(d.sym_laplacian, Matrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}})) < 1e-15);

    const auto c3 = degta::derive_matrices(degta::generate_cycle(3));
    for (double v : c3.rw_normalized.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("isolated nodes get a unit self-loop degree") {
    const auto d = degta::derive_matrices(oracle::graph_from_edges(3, {{0, 1}}));
    CHECK(d.degree[2] == 0);
    CHECK(d.rw_normalized(2, 2) == 1.0);
    CHECK(d.sym_laplacian(2, 2) == 0.0);
  }

  TEST_CASE("derived matrices agree with the dense oracle on random graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Graph g = oracle::random_graph(5 + seed % 12, 0.3, 2, seed);
      const auto d = degta::derive_matrices(g);
      CHECK(oracle::max_abs(oracle::to_eigen(d.rw_normalized), oracle::walk_matrix(g)) < 1e-15);
      CHECK(oracle::max_abs(oracle::to_eigen(d.sym_laplacian), oracle::sym_laplacian(g)) < 1e-15);
    }
  }

  TEST_CASE("property: row-stochastic walk matrix, symmetric PSD Laplacian with spectrum in [0,2]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const Graph g = oracle::random_graph(3 + seed % 14, 0.1 + 0.03 * (seed % 10), 1, 100 + seed);
      const auto d = degta::derive_matrices(g);
      for (std::size_t r = 0; r < g.num_nodes(); ++r) {
        double total = 0.0;
        for (double v : d.rw_normalized.row(r)) total += v;
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
      const auto l = oracle::to_eigen(d.sym_laplacian);
      CHECK(oracle::max_abs(l, l.transpose()) <= 1e-12);
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(l).eigenvalues();
      CHECK(std::abs(ev.minCoeff()) <= 1e-9);
      CHECK(ev.maxCoeff() <= 2.0 + 1e-12);
    }
  }

  TEST_CASE("bfs_distances examples") {
    CHECK(degta::bfs_distances(degta::generate_cycle(6), 0, 8) == std::vector<int>{0, 1, 2, 3, 2, 1});
    const auto split = degta::bfs_distances(two_triangles(), 0, 8);
    CHECK(split == std::vector<int>{0, 1, 1, degta::kUnreached, degta::kUnreached, degta::kUnreached});
    const Graph p3 = oracle::graph_from_edges(3, {{0, 1}, {1, 2}});
    CHECK(degta::bfs_distances(p3, 1, 8) == std::vector<int>{1, 0, 1});
    // Distances at or beyond the cap are reported as unreached.
    CHECK(degta::bfs_distances(degta::generate_cycle(6), 0, 3) == std::vector<int>{0, 1, 2, degta::kUnreached, 2, 1});
  }

  TEST_CASE("property: bfs_distances matches Floyd-Warshall for N <= 16") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Graph g = oracle::random_graph(2 + seed % 15, 0.15 + 0.02 * (seed % 8), 1, 200 + seed);
      const auto fw = oracle::floyd_warshall(g);
      const int cap = 1 + static_cast<int>(seed % 7);
      for (NodeId s = 0; s < g.num_nodes(); ++s) {
        const auto d = degta::bfs_distances(g, s, cap);
        for (std::size_t j = 0; j < g.num_nodes(); ++j) {
          const int expected = fw[s][j] < cap ? fw[s][j] : degta::kUnreached;
          CHECK(d[j] == expected);
        }
      }
    }
  }

  TEST_CASE("permute examples and round trip") {
    const Graph g = oracle::random_graph(9, 0.4, 3, 7).with_labels({0, 1, 2, 0, 1, 2, 0, 1, 2});
    std::vector<NodeId> id(9);
    std::iota(id.begin(), id.end(), 0);
    CHECK(degta::permute(g, id) == g);

    const std::vector<NodeId> swap{1, 0};
    CHECK(degta::permute(k2(), swap).edge_list() == k2().edge_list());

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto pi = oracle::random_permutation(9, seed);
      const Graph moved = degta::permute(g, pi);
      for (auto [u, v] : g.edge_list()) CHECK(moved.has_edge(pi[u], pi[v]));
      CHECK(moved.num_edges() == g.num_edges());
      for (NodeId u = 0; u < 9; ++u) {
        CHECK(moved.labels()[pi[u]] == g.labels()[u]);
        CHECK(moved.features()(pi[u], 2) == g.features()(u, 2));
      }
      CHECK(degta::permute(moved, degta::inverse_permutation(pi)) == g);
    }
  }

  TEST_CASE("permute rejects non-bijections") {
    const std::vector<NodeId> repeated{0, 0};
    CHECK_THROWS_AS(degta::permute(k2(), repeated), degta::Error);
    const std::vector<NodeId> short_pi{0};
    CHECK_THROWS_AS(degta::permute(k2(), short_pi), degta::Error);
  }

  TEST_CASE("split validation") {
    const Graph g = oracle::random_graph(6, 0.5, 1, 3);
    CHECK_NOTHROW(degta::validate_splits(g.with_splits({{0, 1}, {2, 3}, {4, 5}})));
    CHECK_THROWS_AS((void)g.with_splits({{0, 1}, {1, 3}, {4}}), degta::Error);
    CHECK_THROWS_AS((void)g.with_splits({{0, 9}, {}, {}}), degta::Error);
  }
}
