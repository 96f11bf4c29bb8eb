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

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>

#include "degta/bench.hpp"
#include "degta/checkpoint.hpp"
#include "degta/dataset.hpp"
#include "degta/degta.h"
#include "degta/encodings.hpp"
#include "degta/error.hpp"
#include "degta/generators.hpp"
#include "degta/gradcheck.hpp"
#include "degta/model.hpp"
#include "degta/report.hpp"
#include "json.hpp"

struct degta_dataset {
  degta::DatasetKind kind = degta::DatasetKind::kNode;
  degta::Graph graph;       // node and graph-only datasets
  degta::GraphDataset set;  // graph sets
};

struct degta_model {
  degta::Model model;
  std::vector<degta::EpochRecord> history;
  int best_epoch = -1;
};

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

degta_status record(degta_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
degta_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return DEGTA_OK;
  } catch (const degta::Error& e) {
    return record(static_cast<degta_status>(e.kind()), e.what());
  } catch (const json::exception& e) {
    return record(DEGTA_VALIDATION, e.what());
  } catch (const fs::filesystem_error& e) {
    return record(DEGTA_VALIDATION, e.what());
  } catch (const std::bad_alloc&) {
    return record(DEGTA_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(DEGTA_INTERNAL, e.what());
  } catch (...) {
    return record(DEGTA_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) degta::fail(degta::ErrorKind::kUsage, std::string(what) + " must not be NULL");
}

char* to_c_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string pe_name_or_default(const char* s) { return s == nullptr ? "jaccard" : s; }
std::string se_name_or_default(const char* s) { return s == nullptr ? "rwse" : s; }

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) degta::fail(degta::ErrorKind::kValidation, "cannot write " + file.string());
  out << text;
  if (!out) degta::fail(degta::ErrorKind::kValidation, "failed writing " + file.string());
}

degta::DeGTAConfig to_config(const degta_train_config& c) {
  degta::DeGTAConfig cfg;
  cfg.k = c.k;
  cfg.hidden = c.hidden;
  cfg.layers = c.layers;
  cfg.pe = degta::parse_pe_kind(pe_name_or_default(c.pe));
  cfg.se = degta::parse_se_kind(se_name_or_default(c.se));
  cfg.bandwidth = c.bandwidth;
  cfg.sampling.kind = degta::attn::parse_sampling_kind(c.sample == nullptr ? "topk" : c.sample);
  cfg.sampling.top_k = c.top_k;
  cfg.sampling.tau = c.tau;
  cfg.literal_softmax = c.literal_softmax != 0;
  cfg.learning_rate = c.learning_rate;
  cfg.weight_decay = c.weight_decay;
  cfg.epochs = c.epochs;
  cfg.seed = c.seed;
  cfg.dropout = c.dropout;
  cfg.residual = c.residual != 0;
  cfg.ablation = degta::parse_ablation(c.ablation == nullptr ? "full" : c.ablation);
  degta::validate(cfg.resolved());
  return cfg;
}

json metrics_json(const degta::Metrics& m) {
  return json{{"metric", m.metric}, {"train", m.train}, {"val", m.val}, {"test", m.test}};
}

json encode_graph(const degta::Graph& g, const degta::EncodingOptions& eo, const fs::path& dir) {
  const degta::EncodingSet enc = degta::encode(g, eo);
  fs::create_directories(dir);
  degta::write_matrix_csv(enc.pe, dir / "P.csv");
  degta::write_matrix_csv(enc.se, dir / "S.csv");
  return json{{"nodes", g.num_nodes()}, {"edges", g.num_edges()}};
}

}  // namespace

extern "C" {

const char* degta_version(void) { return "1.0.0"; }

const char* degta_last_error(void) { return g_last_error.c_str(); }

void degta_string_free(char* s) { std::free(s); }

degta_status degta_dataset_load(const char* dir, degta_dataset** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<degta_dataset>();
    ds->kind = degta::detect_dataset_kind(dir);
    switch (ds->kind) {
      case degta::DatasetKind::kNode:
        ds->graph = degta::load_node_dataset(dir);
        break;
      case degta::DatasetKind::kGraphOnly:
        ds->graph = degta::load_graph_dir(dir);
        break;
      case degta::DatasetKind::kGraphSet:
        ds->set = degta::load_graph_dataset(dir);
        break;
    }
    *out = ds.release();
  });
}

degta_status degta_dataset_save(const degta_dataset* ds, const char* dir) {
  return guarded([&] {
    need(ds, "dataset");
    need(dir, "dir");
    if (ds->kind == degta::DatasetKind::kGraphSet)
      degta::save_graph_dataset(ds->set, dir);
    else
      degta::save_node_dataset(ds->graph, dir);
  });
}

degta_status degta_dataset_info_get(const degta_dataset* ds, degta_dataset_info* info) {
  return guarded([&] {
    need(ds, "dataset");
    need(info, "info");
    *info = degta_dataset_info{};
    info->kind = static_cast<degta_dataset_kind>(ds->kind);
    if (ds->kind == degta::DatasetKind::kGraphSet) {
      info->num_graphs = ds->set.size();
      for (const degta::Graph& g : ds->set.graphs) {
        info->num_nodes += g.num_nodes();
        info->num_edges += g.num_edges();
      }
      info->feature_dim = ds->set.feature_dim();
      info->num_outputs = static_cast<size_t>(ds->set.num_outputs());
      info->regression = ds->set.regression ? 1 : 0;
    } else {
      info->num_graphs = 1;
      info->num_nodes = ds->graph.num_nodes();
      info->num_edges = ds->graph.num_edges();
      info->feature_dim = ds->graph.feature_dim();
      const std::vector<int>& labels = ds->graph.labels();
      info->num_outputs = labels.empty() ? 0 : static_cast<size_t>(*std::max_element(labels.begin(), labels.end()) + 1);
    }
  });
}

void degta_dataset_free(degta_dataset* ds) { delete ds; }

void degta_gen_params_init(degta_gen_params* p) {
  if (p == nullptr) return;
  const degta::SbmParams sbm;
  *p = degta_gen_params{};
  p->kind = DEGTA_GEN_SBM;
  p->nodes = sbm.nodes;
  p->blocks = sbm.blocks;
  p->p_in = sbm.p_in;
  p->p_out = sbm.p_out;
  p->noise = sbm.noise;
  p->n = 6;
  p->count = 2;
  p->skip = 2;
  p->p = 0.2;
  p->features = 4;
  p->seed = 0;
}

degta_status degta_generate(const degta_gen_params* p, degta_dataset** out) {
  return guarded([&] {
    need(p, "params");
    need(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<degta_dataset>();
    switch (p->kind) {
      case DEGTA_GEN_SBM:
        ds->kind = degta::DatasetKind::kNode;
        ds->graph = degta::generate_sbm({p->nodes, p->blocks, p->p_in, p->p_out, p->noise}, p->seed);
        break;
      case DEGTA_GEN_CYCLE:
        ds->kind = degta::DatasetKind::kGraphOnly;
        ds->graph = degta::generate_cycle(p->n);
        break;
      case DEGTA_GEN_DISJOINT_CYCLES:
        ds->kind = degta::DatasetKind::kGraphOnly;
        ds->graph = degta::generate_disjoint_cycles(p->n, p->count);
        break;
      case DEGTA_GEN_CSL:
        ds->kind = degta::DatasetKind::kGraphOnly;
        ds->graph = degta::generate_csl(p->n, p->skip);
        break;
      case DEGTA_GEN_RANDOM:
        ds->kind = degta::DatasetKind::kGraphOnly;
        ds->graph = degta::generate_random_graph(p->nodes, p->p, p->features, p->seed);
        break;
      default:
        degta::fail(degta::ErrorKind::kUsage, "unknown generator kind " + std::to_string(static_cast<int>(p->kind)));
    }
    *out = ds.release();
  });
}

void degta_encode_options_init(degta_encode_options* opts) {
  if (opts == nullptr) return;
  opts->pe = "jaccard";
  opts->se = "rwse";
  opts->k = 8;
  opts->bandwidth = 1.0;
}

degta_status degta_encode_to_dir(const degta_dataset* ds, const degta_encode_options* opts, const char* out_dir) {
  return guarded([&] {
    need(ds, "dataset");
    need(opts, "options");
    need(out_dir, "out_dir");
    degta::EncodingOptions eo;
    eo.pe = degta::parse_pe_kind(pe_name_or_default(opts->pe));
    eo.se = degta::parse_se_kind(se_name_or_default(opts->se));
    eo.k = opts->k;
    eo.bandwidth = opts->bandwidth;
    degta::require(eo.k >= 1, degta::ErrorKind::kUsage, "k must be >= 1");
    degta::require(eo.bandwidth > 0.0, degta::ErrorKind::kUsage, "bandwidth must be positive");
    const fs::path root(out_dir);
    json meta{{"pe", degta::to_string(eo.pe)}, {"se", degta::to_string(eo.se)}, {"K", eo.k}, {"h", eo.bandwidth}};
    if (ds->kind == degta::DatasetKind::kGraphSet) {
      json graphs = json::array();
      for (std::size_t i = 0; i < ds->set.size(); ++i) {
        json entry = encode_graph(ds->set.graphs[i], eo, root / ds->set.names[i]);
        entry["name"] = ds->set.names[i];
        graphs.push_back(std::move(entry));
      }
      meta["graphs"] = std::move(graphs);
    } else {
      meta.update(encode_graph(ds->graph, eo, root));
    }
    write_text(root / "meta.json", meta.dump(1) + "\n");
  });
}

void degta_train_config_init(degta_train_config* c) {
  if (c == nullptr) return;
  const degta::DeGTAConfig d;
  *c = degta_train_config{};
  c->task = "node";
  c->ablation = "full";
  c->pe = "jaccard";
  c->se = "rwse";
  c->sample = "topk";
  c->layers = d.layers;
  c->k = d.k;
  c->hidden = d.hidden;
  c->top_k = d.sampling.top_k;
  c->tau = d.sampling.tau;
  c->bandwidth = d.bandwidth;
  c->learning_rate = d.learning_rate;
  c->weight_decay = d.weight_decay;
  c->epochs = d.epochs;
  c->dropout = d.dropout;
  c->residual = d.residual ? 1 : 0;
  c->literal_softmax = d.literal_softmax ? 1 : 0;
  c->seed = d.seed;
}

degta_status degta_train(const degta_dataset* ds, const degta_train_config* c, degta_model** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(c, "config");
    need(out, "out");
    *out = nullptr;
    const degta::TaskKind task = degta::parse_task(c->task == nullptr ? "node" : c->task);
    const degta::DeGTAConfig cfg = to_config(*c);
    degta::TrainResult result;
    if (task == degta::TaskKind::kNode) {
      degta::require(ds->kind == degta::DatasetKind::kNode, degta::ErrorKind::kValidation,
                     "node task needs a node dataset (edges.tsv, features.csv, labels.csv, *.idx)");
      result = degta::train_node(ds->graph, cfg);
    } else {
      degta::require(ds->kind == degta::DatasetKind::kGraphSet, degta::ErrorKind::kValidation,
                     "graph task needs a graph dataset (per-graph directories, targets.csv, splits.csv)");
      result = degta::train_graph(ds->set, cfg);
    }
    auto m = std::make_unique<degta_model>();
    m->model = std::move(result.model);
    m->history = std::move(result.history);
    m->best_epoch = result.best_epoch;
    *out = m.release();
  });
}

degta_status degta_model_history_csv(const degta_model* model, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    std::string csv = "epoch,train_loss,val_metric\n";
    for (const degta::EpochRecord& r : model->history)
      csv += std::to_string(r.epoch) + "," + degta::format_double(r.train_loss) + "," +
             degta::format_double(r.val_metric) + "\n";
    *out = to_c_string(csv);
  });
}

degta_status degta_model_best_epoch(const degta_model* model, int* epoch) {
  return guarded([&] {
    need(model, "model");
    need(epoch, "epoch");
    *epoch = model->best_epoch;
  });
}

degta_status degta_model_save(const degta_model* model, const char* file) {
  return guarded([&] {
    need(model, "model");
    need(file, "file");
    degta::save_checkpoint(model->model, file);
  });
}

degta_status degta_model_load(const char* file, degta_model** out) {
  return guarded([&] {
    need(file, "file");
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<degta_model>();
    m->model = degta::load_checkpoint(file);
    *out = m.release();
  });
}

void degta_model_free(degta_model* model) { delete model; }

degta_status degta_evaluate(const degta_model* model, const degta_dataset* ds, char** json_out) {
  return guarded([&] {
    need(model, "model");
    need(ds, "dataset");
    need(json_out, "json_out");
    *json_out = nullptr;
    degta::Metrics m;
    switch (ds->kind) {
      case degta::DatasetKind::kNode:
        m = degta::evaluate_node(model->model, ds->graph);
        break;
      case degta::DatasetKind::kGraphSet:
        m = degta::evaluate_graph(model->model, ds->set);
        break;
      case degta::DatasetKind::kGraphOnly:
        degta::fail(degta::ErrorKind::kValidation, "evaluation needs labels and splits");
    }
    *json_out = to_c_string(metrics_json(m).dump(1) + "\n");
  });
}

degta_status degta_export_attention(const degta_model* model, const degta_dataset* ds, const char* graph_name,
                                    char** json_out) {
  return guarded([&] {
    need(model, "model");
    need(ds, "dataset");
    need(json_out, "json_out");
    *json_out = nullptr;
    const degta::Graph* g = &ds->graph;
    if (ds->kind == degta::DatasetKind::kGraphSet) {
      degta::require(ds->set.size() > 0, degta::ErrorKind::kValidation, "graph dataset is empty");
      g = &ds->set.graphs.front();
      if (graph_name != nullptr) {
        const auto it = std::find(ds->set.names.begin(), ds->set.names.end(), graph_name);
        degta::require(it != ds->set.names.end(), degta::ErrorKind::kValidation,
                       [&] { return "no graph named '" + std::string(graph_name) + "' in the dataset"; });
        g = &ds->set.graphs[static_cast<std::size_t>(it - ds->set.names.begin())];
      }
    } else {
      degta::require(graph_name == nullptr, degta::ErrorKind::kUsage, "graph selection only applies to graph datasets");
    }
    *json_out = to_c_string(degta::report_to_json(degta::build_report(model->model, *g)));
  });
}

degta_status degta_gradcheck(double eps, uint64_t seed, double* max_rel_error, char** json_out) {
  return guarded([&] {
    degta::require(eps > 0.0 && eps < 1.0, degta::ErrorKind::kUsage, "eps must lie in (0, 1)");
    const degta::GradCheckSuiteReport report = degta::run_gradcheck_suite(eps, seed);
    if (max_rel_error != nullptr) *max_rel_error = report.max_rel_error;
    if (json_out != nullptr) {
      json lines = json::array();
      for (const degta::GradCheckLine& l : report.lines)
        lines.push_back({{"component", l.component},
                         {"max_rel_error", l.result.max_rel_error},
                         {"max_abs_error", l.result.max_abs_error},
                         {"entries", l.result.entries}});
      const json j{{"eps", eps},
                   {"seed", seed},
                   {"max_rel_error", report.max_rel_error},
                   {"seconds", report.seconds},
                   {"components", std::move(lines)}};
      *json_out = to_c_string(j.dump(1) + "\n");
    }
  });
}

degta_status degta_bench(size_t min_n, size_t max_n, uint64_t seed, char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    *json_out = nullptr;
    degta::BenchOptions opts;
    opts.min_n = min_n;
    opts.max_n = max_n;
    opts.seed = seed;
    json rows = json::array();
    for (const degta::BenchRow& r : degta::run_bench(opts))
      rows.push_back({{"n", r.n}, {"edges", r.edges}, {"encode", r.encode}, {"local", r.local}, {"global", r.global}});
    const json j{{"k", opts.k}, {"hidden", opts.hidden}, {"avg_degree", opts.avg_degree}, {"rows", std::move(rows)}};
    *json_out = to_c_string(j.dump(1) + "\n");
  });
}

}  // extern "C"
