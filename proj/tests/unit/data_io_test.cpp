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

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "degta/checkpoint.hpp"
#include "degta/dataset.hpp"
#include "degta/encodings.hpp"
#include "degta/error.hpp"
#include "degta/generators.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace fs = std::filesystem;
using degta::Graph;
using degta::Matrix;

namespace {

/// Fresh directory under the system temp path, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("degta-unit-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& file, const std::string& text) {
  fs::create_directories(file.parent_path());
  std::ofstream(file) << text;
}

void write_two_node_fixture(const fs::path& dir) {
  write(dir / "edges.tsv", "# comment\n0\t1\n");
  write(dir / "features.csv", "1.0,2.0,3.0\n4,5,6\n");
  write(dir / "labels.csv", "0\n1\n");
  write(dir / "train.idx", "0\n");
  write(dir / "val.idx", "1\n");
  write(dir / "test.idx", "");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const degta::Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("data-io") {
  TEST_CASE("minimal two-node fixture") {
    TempDir tmp;
    write_two_node_fixture(tmp.path());
    CHECK(degta::detect_dataset_kind(tmp.path()) == degta::DatasetKind::kNode);
    const Graph g = degta::load_node_dataset(tmp.path());
    CHECK(g.num_nodes() == 2);
    CHECK(g.feature_dim() == 3);
    CHECK(g.num_edges() == 1);
    CHECK(g.features()(1, 2) == 6.0);
    CHECK(g.labels() == std::vector<int>{0, 1});
    CHECK(g.splits().train == std::vector<degta::NodeId>{0});
  }

  TEST_CASE("graph-only directory") {
    TempDir tmp;
    write(tmp.path() / "edges.tsv", "0\t1\n1\t2\n");
    write(tmp.path() / "features.csv", "1\n1\n1\n");
    CHECK(degta::detect_dataset_kind(tmp.path()) == degta::DatasetKind::kGraphOnly);
    CHECK(degta::load_graph_dir(tmp.path()).num_edges() == 2);
  }

  TEST_CASE("validation errors name the offending file") {
    TempDir tmp;
    write_two_node_fixture(tmp.path());
    write(tmp.path() / "labels.csv", "0\n1\n0\n");
    CHECK(error_of([&] { degta::load_node_dataset(tmp.path()); }).find("labels.csv") != std::string::npos);

    write_two_node_fixture(tmp.path());
    write(tmp.path() / "val.idx", "0\n");
    CHECK_THROWS_AS(degta::load_node_dataset(tmp.path()), degta::Error);

    write_two_node_fixture(tmp.path());
    write(tmp.path() / "features.csv", "1,2,3\n4,5\n");
    const std::string ragged = error_of([&] { degta::load_node_dataset(tmp.path()); });
    CHECK(ragged.find("features.csv:2") != std::string::npos);

    write_two_node_fixture(tmp.path());
    write(tmp.path() / "edges.tsv", "0\t1\n0\t5\n");
    CHECK(error_of([&] { degta::load_node_dataset(tmp.path()); }).find("edges.tsv:2") != std::string::npos);

    write_two_node_fixture(tmp.path());
    fs::remove(tmp.path() / "features.csv");
    CHECK(error_of([&] { degta::load_node_dataset(tmp.path()); }).find("features.csv") != std::string::npos);
  }

  TEST_CASE("graph dataset fixtures") {
    TempDir tmp;
    write(tmp.path() / "a" / "edges.tsv", "0\t1\n");
    write(tmp.path() / "a" / "features.csv", "1,0\n0,1\n");
    write(tmp.path() / "b" / "edges.tsv", "0\t1\n1\t2\n");
    write(tmp.path() / "b" / "features.csv", "1,1\n0,0\n1,0\n");
    write(tmp.path() / "targets.csv", "a,0.25\nb,1.5\n");
    write(tmp.path() / "splits.csv", "a,train\nb,test\n");
    CHECK(degta::detect_dataset_kind(tmp.path()) == degta::DatasetKind::kGraphSet);
    const auto ds = degta::load_graph_dataset(tmp.path());
    CHECK(ds.size() == 2);
    CHECK(ds.regression);
    CHECK(ds.targets == std::vector<double>{0.25, 1.5});
    CHECK(ds.num_outputs() == 1);

    write(tmp.path() / "b" / "features.csv", "1\n0\n1\n");
    CHECK(error_of([&] { degta::load_graph_dataset(tmp.path()); }).find("b") != std::string::npos);
  }

  TEST_CASE("classification targets and empty directories") {
    TempDir tmp;
    write(tmp.path() / "x" / "edges.tsv", "0\t1\n");
    write(tmp.path() / "x" / "features.csv", "1\n1\n");
    write(tmp.path() / "targets.csv", "x,2\n");
    write(tmp.path() / "splits.csv", "x,train\n");
    const auto ds = degta::load_graph_dataset(tmp.path());
    CHECK_FALSE(ds.regression);
    CHECK(ds.num_outputs() == 3);

    TempDir empty;
    CHECK_THROWS_AS(degta::detect_dataset_kind(empty.path()), degta::Error);
    CHECK_THROWS_AS(degta::load_graph_dataset(empty.path()), degta::Error);
  }

  TEST_CASE("property: save then load round-trips exactly") {
    TempDir tmp;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Graph g = degta::generate_sbm({}, seed);
      const fs::path dir = tmp.path() / ("node" + std::to_string(seed));
      degta::save_node_dataset(g, dir);
      CHECK(degta::load_node_dataset(dir) == g);
    }
    const Graph unlabeled = oracle::random_graph(9, 0.3, 4, 1);
    degta::save_node_dataset(unlabeled, tmp.path() / "plain");
    CHECK(degta::load_graph_dir(tmp.path() / "plain") == unlabeled);

    degta::GraphDataset ds;
    for (std::size_t i = 0; i < 4; ++i) {
      ds.names.push_back("graph" + std::to_string(i));
      ds.graphs.push_back(oracle::random_graph(5 + i, 0.4, 3, 10 + i));
      ds.targets.push_back(0.1 * double(i) + 1e-17);
    }
    ds.regression = true;
    ds.splits = {{0, 1}, {2}, {3}};
    degta::save_graph_dataset(ds, tmp.path() / "set");
    CHECK(degta::load_graph_dataset(tmp.path() / "set") == ds);
  }

  TEST_CASE("matrix CSV uses round-trip formatting") {
    TempDir tmp;
    std::mt19937_64 rng(2);
    const Matrix m = oracle::random_matrix(5, 4, rng, 1e6);
    degta::write_matrix_csv(m, tmp.path() / "m.csv");
    CHECK(degta::read_matrix_csv(tmp.path() / "m.csv") == m);
    CHECK(degta::format_double(0.1) == "0.1");
  }

  TEST_CASE("generators") {
    const Graph c6 = degta::generate_cycle(6);
    CHECK(c6.num_nodes() == 6);
    CHECK(c6.num_edges() == 6);
    for (degta::NodeId u = 0; u < 6; ++u) CHECK(c6.degree(u) == 2);

    CHECK(degta::generate_sbm({}, 7) == degta::generate_sbm({}, 7));
    CHECK_FALSE(degta::generate_sbm({}, 7) == degta::generate_sbm({}, 8));
    const Graph sbm = degta::generate_sbm({}, 7);
    CHECK(sbm.num_nodes() == 60);
    CHECK(sbm.splits().train.size() == 36);
    CHECK(sbm.splits().val.size() == 12);
    CHECK(sbm.splits().test.size() == 12);

    const Graph two = degta::generate_disjoint_cycles(3, 2);
    CHECK(two.num_nodes() == 6);
    CHECK(degta::bfs_distances(two, 0, 10)[3] == degta::kUnreached);

    CHECK_THROWS_AS(degta::generate_cycle(2), degta::Error);
    degta::SbmParams bad;
    bad.p_in = 1.5;
    CHECK_THROWS_AS(degta::generate_sbm(bad, 0), degta::Error);
    CHECK_THROWS_AS(degta::generate_random_graph(5, -0.1, 2, 0), degta::Error);
  }

  TEST_CASE("csl(11,2) and csl(11,3) are 4-regular and separated by RWSE at K = 6") {
    const Graph a = degta::generate_csl(11, 2);
    const Graph b = degta::generate_csl(11, 3);
    for (degta::NodeId u = 0; u < 11; ++u) {
      CHECK(a.degree(u) == 4);
      CHECK(b.degree(u) == 4);
    }
    const auto ra = oracle::rwse(a, 6);
    const auto rb = oracle::rwse(b, 6);
    CHECK(oracle::max_abs(oracle::to_eigen(degta::rwse(a, 6)), ra) <= 1e-12);
    CHECK(oracle::max_abs(oracle::to_eigen(degta::rwse(b, 6)), rb) <= 1e-12);
    CHECK(std::abs(ra(0, 5) - rb(0, 5)) > 1e-6);
  }

  TEST_CASE("checkpoint round-trip is bit-exact") {
    TempDir tmp;
    degta::DeGTAConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 11;
    cfg.pe = degta::PeKind::kRwpe;
    const auto trained = degta::train_node(degta::generate_sbm({}, 3), cfg);
    const fs::path file = tmp.path() / "model.ckpt";
    degta::save_checkpoint(trained.model, file);
    const auto loaded = degta::load_checkpoint(file);
    CHECK(loaded == trained.model);
    CHECK(degta::serialize_checkpoint(loaded) == degta::serialize_checkpoint(trained.model));
    CHECK(degta::config_from_json(degta::config_to_json(cfg)) == cfg);

    std::string bytes = degta::serialize_checkpoint(trained.model);
    CHECK_THROWS_AS(degta::deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), degta::Error);
    bytes[0] = 'X';
    CHECK_THROWS_AS(degta::deserialize_checkpoint(bytes), degta::Error);
    CHECK_THROWS_AS(degta::load_checkpoint(tmp.path() / "missing.ckpt"), degta::Error);
  }
}
