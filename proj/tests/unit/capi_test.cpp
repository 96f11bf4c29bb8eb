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

// Exercises the shared library through its C header only.

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "degta/degta.h"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("degta-capi-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

/// Takes ownership of a library string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  degta_string_free(s);
  return out;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

degta_dataset* make_sbm(uint64_t seed) {
  degta_gen_params p;
  degta_gen_params_init(&p);
  p.seed = seed;
  degta_dataset* ds = nullptr;
  REQUIRE(degta_generate(&p, &ds) == DEGTA_OK);
  return ds;
}

void write(const fs::path& file, const std::string& text) {
  fs::create_directories(file.parent_path());
  std::ofstream(file) << text;
}

}  // namespace

TEST_CASE("version and argument checks") {
  CHECK(std::strlen(degta_version()) > 0);
  degta_dataset* ds = nullptr;
  CHECK(degta_dataset_load(nullptr, &ds) == DEGTA_USAGE);
  CHECK(std::string(degta_last_error()).find("dir") != std::string::npos);
  CHECK(degta_generate(nullptr, &ds) == DEGTA_USAGE);
  degta_string_free(nullptr);
  degta_dataset_free(nullptr);
  degta_model_free(nullptr);
}

TEST_CASE("generation and dataset info") {
  degta_dataset* ds = make_sbm(0);
  degta_dataset_info info;
  REQUIRE(degta_dataset_info_get(ds, &info) == DEGTA_OK);
  CHECK(info.kind == DEGTA_DATASET_NODE);
  CHECK(info.num_graphs == 1);
  CHECK(info.num_nodes == 60);
  CHECK(info.num_outputs == 2);
  CHECK(info.regression == 0);
  degta_dataset_free(ds);

  degta_gen_params p;
  degta_gen_params_init(&p);
  p.kind = DEGTA_GEN_CYCLE;
  p.n = 6;
  REQUIRE(degta_generate(&p, &ds) == DEGTA_OK);
  REQUIRE(degta_dataset_info_get(ds, &info) == DEGTA_OK);
  CHECK(info.kind == DEGTA_DATASET_GRAPH_ONLY);
  CHECK(info.num_edges == 6);
  degta_dataset_free(ds);

  p.kind = DEGTA_GEN_CSL;
  p.n = 11;
  p.skip = 1;
  CHECK(degta_generate(&p, &ds) == DEGTA_USAGE);
  CHECK(std::strlen(degta_last_error()) > 0);
}

TEST_CASE("dataset save, load and encode") {
  TempDir tmp;
  degta_dataset* ds = make_sbm(1);
  REQUIRE(degta_dataset_save(ds, (tmp / "sbm").c_str()) == DEGTA_OK);
  degta_dataset* back = nullptr;
  REQUIRE(degta_dataset_load((tmp / "sbm").c_str(), &back) == DEGTA_OK);
  degta_dataset_info a, b;
  degta_dataset_info_get(ds, &a);
  degta_dataset_info_get(back, &b);
  CHECK(a.num_nodes == b.num_nodes);
  CHECK(a.num_edges == b.num_edges);
  CHECK(a.feature_dim == b.feature_dim);

  degta_encode_options opts;
  degta_encode_options_init(&opts);
  opts.k = 5;
  opts.se = "tcse";
  REQUIRE(degta_encode_to_dir(back, &opts, (tmp / "enc").c_str()) == DEGTA_OK);
  const json meta = json::parse(slurp(tmp / "enc/meta.json"));
  CHECK(meta["pe"] == "jaccard");
  CHECK(meta["se"] == "tcse");
  CHECK(meta["K"] == 5);
  CHECK(meta["h"] == 1.0);
  const std::string p_csv = slurp(tmp / "enc/P.csv");
  CHECK(std::count(p_csv.begin(), p_csv.end(), '\n') == 60);

  opts.pe = "spectral";
  CHECK(degta_encode_to_dir(back, &opts, (tmp / "enc2").c_str()) == DEGTA_USAGE);

  degta_dataset* missing = nullptr;
  CHECK(degta_dataset_load((tmp / "nope").c_str(), &missing) == DEGTA_VALIDATION);
  CHECK(missing == nullptr);
  degta_dataset_free(ds);
  degta_dataset_free(back);
}

TEST_CASE("train, evaluate, checkpoint and export") {
  TempDir tmp;
  degta_dataset* ds = make_sbm(2);
  degta_train_config cfg;
  degta_train_config_init(&cfg);
  cfg.epochs = 40;
  degta_model* model = nullptr;
  REQUIRE(degta_train(ds, &cfg, &model) == DEGTA_OK);

  char* csv = nullptr;
  REQUIRE(degta_model_history_csv(model, &csv) == DEGTA_OK);
  const std::string history = take(csv);
  CHECK(history.rfind("epoch,train_loss,val_metric\n", 0) == 0);
  CHECK(std::count(history.begin(), history.end(), '\n') == 41);
  int best = -1;
  REQUIRE(degta_model_best_epoch(model, &best) == DEGTA_OK);
  CHECK(best >= 1);
  CHECK(best <= 40);

  char* out = nullptr;
  REQUIRE(degta_evaluate(model, ds, &out) == DEGTA_OK);
  const std::string metrics = take(out);
  const json m = json::parse(metrics);
  CHECK(m["metric"] == "accuracy");
  CHECK(m["train"].get<double>() >= 0.9);

  REQUIRE(degta_model_save(model, (tmp / "m.ckpt").c_str()) == DEGTA_OK);
  degta_model* loaded = nullptr;
  REQUIRE(degta_model_load((tmp / "m.ckpt").c_str(), &loaded) == DEGTA_OK);
  REQUIRE(degta_evaluate(loaded, ds, &out) == DEGTA_OK);
  CHECK(take(out) == metrics);
  REQUIRE(degta_model_save(loaded, (tmp / "m2.ckpt").c_str()) == DEGTA_OK);
  CHECK(slurp(tmp / "m.ckpt") == slurp(tmp / "m2.ckpt"));

  REQUIRE(degta_export_attention(loaded, ds, nullptr, &out) == DEGTA_OK);
  const json report = json::parse(take(out));
  for (const char* key : {"layers", "summary", "local_edges", "global_pairs"}) CHECK(report.contains(key));
  CHECK(degta_export_attention(loaded, ds, "g0", &out) == DEGTA_USAGE);
  CHECK(out == nullptr);

  cfg.task = "graph";
  degta_model* wrong = nullptr;
  CHECK(degta_train(ds, &cfg, &wrong) == DEGTA_VALIDATION);
  cfg.task = "node";
  cfg.sample = "gumbel";
  CHECK(degta_train(ds, &cfg, &wrong) == DEGTA_USAGE);
  CHECK(wrong == nullptr);

  degta_model* none = nullptr;
  CHECK(degta_model_load((tmp / "missing.ckpt").c_str(), &none) != DEGTA_OK);
  degta_model_free(model);
  degta_model_free(loaded);
  degta_dataset_free(ds);
}

TEST_CASE("graph datasets") {
  TempDir tmp;
  const fs::path root = tmp / "set";
  std::string targets, splits;
  for (int i = 0; i < 6; ++i) {
    const std::string name = "g" + std::to_string(i);
    std::string edges;
    const int n = 3 + i;
    for (int u = 0; u < n; ++u) edges += std::to_string(u) + "\t" + std::to_string((u + 1) % n) + "\n";
    std::string features;
    for (int u = 0; u < n; ++u) features += "1," + std::to_string(u % 2) + "\n";
    write(root / name / "edges.tsv", edges);
    write(root / name / "features.csv", features);
    targets += name + "," + std::to_string(i % 2) + "\n";
    splits += name + "," + (i < 4 ? "train" : i == 4 ? "val" : "test") + "\n";
  }
  write(root / "targets.csv", targets);
  write(root / "splits.csv", splits);

  degta_dataset* ds = nullptr;
  REQUIRE(degta_dataset_load(root.string().c_str(), &ds) == DEGTA_OK);
  degta_dataset_info info;
  degta_dataset_info_get(ds, &info);
  CHECK(info.kind == DEGTA_DATASET_GRAPH_SET);
  CHECK(info.num_graphs == 6);
  CHECK(info.num_outputs == 2);

  degta_train_config cfg;
  degta_train_config_init(&cfg);
  cfg.task = "graph";
  cfg.epochs = 3;
  cfg.k = 2;
  degta_model* model = nullptr;
  REQUIRE(degta_train(ds, &cfg, &model) == DEGTA_OK);
  char* out = nullptr;
  REQUIRE(degta_export_attention(model, ds, "g3", &out) == DEGTA_OK);
  CHECK(json::parse(take(out))["local_edges"].size() == 2 * (2 * 6 + 6));
  CHECK(degta_export_attention(model, ds, "g9", &out) == DEGTA_VALIDATION);
  degta_model_free(model);
  degta_dataset_free(ds);
}

TEST_CASE("gradient check and bench entry points") {
  double worst = 1.0;
  char* out = nullptr;
  REQUIRE(degta_gradcheck(1e-5, 0, &worst, &out) == DEGTA_OK);
  CHECK(worst < 1e-4);
  const json report = json::parse(take(out));
  CHECK(report["components"].size() > 20);
  CHECK(degta_gradcheck(0.0, 0, &worst, nullptr) == DEGTA_USAGE);

  REQUIRE(degta_bench(16, 32, 0, &out) == DEGTA_OK);
  const json bench = json::parse(take(out));
  CHECK(bench["rows"].size() == 2);
  CHECK(degta_bench(64, 32, 0, &out) == DEGTA_USAGE);
}
