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

// Runs the degta executable as a subprocess and checks exit codes, output
// and written files.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workspace {
 public:
  Workspace() {
    std::mt19937_64 rng(std::random_device{}());
    root_ = fs::temp_directory_path() / ("degta-cli-" + std::to_string(rng()));
    fs::create_directories(root_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  std::string operator/(const std::string& name) const { return (root_ / name).string(); }

  Run run(const std::string& args) const {
    const fs::path out = root_ / "stdout.txt";
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd =
        std::string("'") + DEGTA_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path root_;
};

}  // namespace

TEST_CASE("usage errors exit 1 with usage text") {
  Workspace ws;
  Run r = ws.run("");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR 1:", 0) == 0);

  r = ws.run("train --data x --ckpt y --bogus");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR 1:", 0) == 0);
  CHECK(r.err.find("Usage:") != std::string::npos);

  r = ws.run("frobnicate");
  CHECK(r.code == 1);

  r = ws.run("gen --kind csl --n 11 --skip 1 --out " + ws / "csl");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("ERROR 1:", 0) == 0);

  r = ws.run("train --data x --ckpt y --sample threshold --kg 3");
  CHECK(r.code == 1);
  r = ws.run("train --data x --ckpt y --kg 3 --tau 0.2");
  CHECK(r.code == 1);
  r = ws.run("encode --data x --out y --pe spectral");
  CHECK(r.code == 1);
}

TEST_CASE("every subcommand documents its flags and defaults") {
  Workspace ws;
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"encode", {"--data", "--pe", "--se", "--k", "--h", "--out", "[jaccard]", "[rwse]", "[8]"}},
      {"train",
       {"--data", "--task", "--layers", "--k", "--hidden", "--sample", "--kg", "--tau", "--lr", "--epochs", "--seed",
        "--ablation", "--ckpt", "--metrics", "[200]", "[0.01]"}},
      {"eval", {"--ckpt", "--data"}},
      {"export-attention", {"--ckpt", "--data", "--out", "--graph"}},
      {"gradcheck", {"--eps", "--seed", "1e-05"}},
      {"gen", {"--kind", "--out", "--seed"}},
      {"bench", {"--min-n", "--max-n", "[64]", "[512]"}},
  };
  for (const auto& [sub, flags] : expected) {
    const Run r = ws.run(sub + " --help");
    INFO(sub);
    CHECK(r.code == 0);
    for (const auto& f : flags) CHECK(r.out.find(f) != std::string::npos);
  }
  CHECK(ws.run("--version").code == 0);
}

TEST_CASE("runtime errors carry a machine-readable prefix") {
  Workspace ws;
  Run r = ws.run("eval --ckpt " + ws / "none.ckpt" + " --data " + ws / "none");
  CHECK(r.code == 2);
  CHECK(std::regex_search(r.err, std::regex("^ERROR 2: ")));

  r = ws.run("encode --data " + ws / "none" + " --out " + ws / "enc");
  CHECK(r.code == 2);
  CHECK(r.err.rfind("ERROR 2:", 0) == 0);
}

TEST_CASE("gen, encode, train, eval and export on an SBM dataset") {
  Workspace ws;
  REQUIRE(ws.run("gen --kind sbm --seed 3 --out " + ws / "sbm").code == 0);
  REQUIRE(ws.run("gen --kind sbm --seed 3 --out " + ws / "sbm2").code == 0);
  for (const char* f : {"edges.tsv", "features.csv", "labels.csv", "train.idx", "val.idx", "test.idx"})
    CHECK(slurp(ws / "sbm/" + f) == slurp(ws / "sbm2/" + f));

  Run r = ws.run("encode --data " + ws / "sbm" + " --pe rwpe --se dse --k 6 --out " + ws / "enc");
  REQUIRE(r.code == 0);
  const json meta = json::parse(slurp(ws / "enc/meta.json"));
  CHECK(meta["pe"] == "rwpe");
  CHECK(meta["se"] == "dse");
  CHECK(meta["K"] == 6);
  const std::string s_csv = slurp(ws / "enc/S.csv");
  CHECK(std::count(s_csv.begin(), s_csv.end(), '\n') == 60);
  REQUIRE(ws.run("encode --data " + ws / "sbm" + " --pe rwpe --se dse --k 6 --out " + ws / "enc2").code == 0);
  CHECK(slurp(ws / "enc/P.csv") == slurp(ws / "enc2/P.csv"));

  r = ws.run("train --data " + ws / "sbm" + " --task node --layers 2 --k 8 --hidden 32 --sample topk --epochs 200 " +
             "--seed 0 --ablation full --ckpt " + ws / "m.ckpt");
  REQUIRE(r.code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary["test"].get<double>() >= 0.9);
  const std::string metrics = slurp(ws / "metrics.csv");
  CHECK(metrics.rfind("epoch,train_loss,val_metric\n", 0) == 0);
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 201);

  r = ws.run("train --data " + ws / "sbm" + " --epochs 200 --ckpt " + ws / "m2.ckpt" + " --metrics " + ws / "m2.csv");
  REQUIRE(r.code == 0);
  CHECK(slurp(ws / "m.ckpt") == slurp(ws / "m2.ckpt"));
  CHECK(slurp(ws / "metrics.csv") == slurp(ws / "m2.csv"));

  r = ws.run("eval --ckpt " + ws / "m.ckpt" + " --data " + ws / "sbm");
  REQUIRE(r.code == 0);
  const json eval = json::parse(r.out);
  CHECK(eval["metric"] == "accuracy");
  CHECK(eval["test"].get<double>() >= 0.9);

  r = ws.run("export-attention --ckpt " + ws / "m.ckpt" + " --data " + ws / "sbm" + " --out " + ws / "att.json");
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(ws / "att.json"));
  CHECK(report["layers"].size() == 2);
  for (const char* key : {"positional", "structural", "attribute"}) CHECK(report["summary"].contains(key));

  r = ws.run("train --data " + ws / "sbm" + " --task graph --epochs 2 --ckpt " + ws / "bad.ckpt");
  CHECK(r.code == 2);
}

TEST_CASE("threshold sampling and other generators") {
  Workspace ws;
  REQUIRE(ws.run("gen --kind random --nodes 30 --p 0.2 --out " + ws / "rnd").code == 0);
  REQUIRE(ws.run("gen --kind disjoint_cycles --n 3 --count 2 --out " + ws / "c3c3").code == 0);
  REQUIRE(ws.run("encode --data " + ws / "c3c3" + " --k 4 --out " + ws / "enc").code == 0);
  const std::string s = slurp(ws / "enc/S.csv");
  CHECK(s.substr(0, s.find('\n')).find("0.3333333333333333") != std::string::npos);

  REQUIRE(ws.run("gen --kind sbm --out " + ws / "sbm").code == 0);
  const Run r =
      ws.run("train --data " + ws / "sbm" + " --sample threshold --tau 0.05 --epochs 5 --ckpt " + ws / "t.ckpt");
  CHECK(r.code == 0);
}

TEST_CASE("gradcheck and bench") {
  Workspace ws;
  Run r = ws.run("gradcheck");
  REQUIRE(r.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex("max relative error ([0-9.e+-]+)")));
  CHECK(std::stod(m[1].str()) < 1e-4);
  r = ws.run("gradcheck --json --seed 1");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["max_rel_error"].get<double>() < 1e-4);

  r = ws.run("bench --min-n 16 --max-n 32");
  CHECK(r.code == 0);
  CHECK(r.out.find("global") != std::string::npos);
  r = ws.run("bench --min-n 16 --max-n 32 --json");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["rows"].size() == 2);
}
