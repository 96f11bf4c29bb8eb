/* Copyright 2026 The degta Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the degta library.
 *
 * Every fallible call returns a degta_status. On failure the calling thread's
 * last error message is available from degta_last_error() until the next call
 * into the library from that thread. Strings returned through char** out
 * parameters are owned by the caller and released with degta_string_free().
 */

#ifndef DEGTA_DEGTA_H
#define DEGTA_DEGTA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DEGTA_BUILDING_LIBRARY)
#define DEGTA_API __declspec(dllexport)
#else
#define DEGTA_API __declspec(dllimport)
#endif
#else
#define DEGTA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum degta_status {
  DEGTA_OK = 0,
  DEGTA_USAGE = 1,      /* bad argument or option value */
  DEGTA_VALIDATION = 2, /* malformed input, missing file, shape mismatch */
  DEGTA_NUMERIC = 3,    /* non-finite values, failed numeric check */
  DEGTA_INTERNAL = 4    /* unexpected failure inside the library */
} degta_status;

typedef struct degta_dataset degta_dataset;
typedef struct degta_model degta_model;

DEGTA_API const char* degta_version(void);
DEGTA_API const char* degta_last_error(void);
DEGTA_API void degta_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef enum degta_dataset_kind {
  DEGTA_DATASET_NODE = 0,       /* one labeled graph with node splits */
  DEGTA_DATASET_GRAPH_ONLY = 1, /* one graph without labels */
  DEGTA_DATASET_GRAPH_SET = 2   /* many graphs with graph-level targets */
} degta_dataset_kind;

typedef struct degta_dataset_info {
  degta_dataset_kind kind;
  size_t num_graphs;
  size_t num_nodes; /* summed over graphs */
  size_t num_edges; /* summed over graphs */
  size_t feature_dim;
  size_t num_outputs; /* classes, or 1 for regression; 0 when unlabeled */
  int regression;
} degta_dataset_info;

/* Detects the layout of dir and loads it. */
DEGTA_API degta_status degta_dataset_load(const char* dir, degta_dataset** out);
DEGTA_API degta_status degta_dataset_save(const degta_dataset* ds, const char* dir);
DEGTA_API degta_status degta_dataset_info_get(const degta_dataset* ds, degta_dataset_info* info);
DEGTA_API void degta_dataset_free(degta_dataset* ds);

typedef enum degta_gen_kind {
  DEGTA_GEN_SBM = 0,
  DEGTA_GEN_CYCLE = 1,
  DEGTA_GEN_DISJOINT_CYCLES = 2,
  DEGTA_GEN_CSL = 3,
  DEGTA_GEN_RANDOM = 4 /* Erdos-Renyi graph with Gaussian features */
} degta_gen_kind;

typedef struct degta_gen_params {
  degta_gen_kind kind;
  size_t nodes;    /* sbm, random: node count */
  int blocks;      /* sbm */
  double p_in;     /* sbm */
  double p_out;    /* sbm */
  double noise;    /* sbm: feature noise std-dev */
  size_t n;        /* cycle, disjoint_cycles, csl: cycle length */
  size_t count;    /* disjoint_cycles */
  size_t skip;     /* csl */
  double p;        /* random: edge probability */
  size_t features; /* random: feature width */
  uint64_t seed;
} degta_gen_params;

/* Defaults: sbm with 60 nodes, 2 blocks, p_in 0.3, p_out 0.02, noise 0.5,
 * n 6, count 2, skip 2, p 0.2, 4 features, seed 0. */
DEGTA_API void degta_gen_params_init(degta_gen_params* params);
DEGTA_API degta_status degta_generate(const degta_gen_params* params, degta_dataset** out);

/* ---- encodings --------------------------------------------------------- */

typedef struct degta_encode_options {
  const char* pe; /* "jaccard", "lappe" or "rwpe" */
  const char* se; /* "rwse", "dse" or "tcse" */
  int k;
  double bandwidth;
} degta_encode_options;

/* Defaults: jaccard, rwse, k 8, bandwidth 1. */
DEGTA_API void degta_encode_options_init(degta_encode_options* opts);

/* Writes P.csv, S.csv and meta.json into out_dir (one subdirectory per graph
 * for graph sets, with meta.json at the top). */
DEGTA_API degta_status degta_encode_to_dir(const degta_dataset* ds, const degta_encode_options* opts,
                                           const char* out_dir);

/* ---- training and models ----------------------------------------------- */

typedef struct degta_train_config {
  const char* task;     /* "node" or "graph" */
  const char* ablation; /* full, coupled_attention, summed_integration, no_global, dense_global */
  const char* pe;
  const char* se;
  const char* sample; /* "topk" or "threshold" */
  int layers;
  int k;
  int hidden;
  int top_k;  /* 0 means k */
  double tau; /* 0 means 2 / |candidates| per row */
  double bandwidth;
  double learning_rate;
  double weight_decay;
  int epochs;
  double dropout;
  int residual;
  int literal_softmax;
  uint64_t seed;
} degta_train_config;

DEGTA_API void degta_train_config_init(degta_train_config* cfg);

/* Trains and returns the best-validation model. */
DEGTA_API degta_status degta_train(const degta_dataset* ds, const degta_train_config* cfg, degta_model** out);

/* CSV "epoch,train_loss,val_metric" of the training run; empty body for
 * models loaded from a checkpoint. */
DEGTA_API degta_status degta_model_history_csv(const degta_model* model, char** out);
DEGTA_API degta_status degta_model_best_epoch(const degta_model* model, int* epoch);

DEGTA_API degta_status degta_model_save(const degta_model* model, const char* file);
DEGTA_API degta_status degta_model_load(const char* file, degta_model** out);
DEGTA_API void degta_model_free(degta_model* model);

/* {"metric": "accuracy"|"mae", "train": x, "val": x, "test": x} */
DEGTA_API degta_status degta_evaluate(const degta_model* model, const degta_dataset* ds, char** json_out);

/* Attention report of one graph. graph_name selects a member of a graph set
 * and may be NULL (first graph); it must be NULL for single-graph datasets. */
DEGTA_API degta_status degta_export_attention(const degta_model* model, const degta_dataset* ds, const char* graph_name,
                                              char** json_out);

/* ---- verification ------------------------------------------------------ */

/* Runs the finite-difference suite. json_out lists every component with its
 * maximum relative and absolute error. */
DEGTA_API degta_status degta_gradcheck(double eps, uint64_t seed, double* max_rel_error, char** json_out);

/* Per-module forward wall times (seconds) for N = min_n, 2 min_n, ..., max_n. */
DEGTA_API degta_status degta_bench(size_t min_n, size_t max_n, uint64_t seed, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* DEGTA_DEGTA_H */
