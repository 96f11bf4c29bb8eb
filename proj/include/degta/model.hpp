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

// The layered model: per-layer view encoders, local and global attention,
// adaptive integration, task heads, losses and the training loop.

#ifndef DEGTA_MODEL_HPP
#define DEGTA_MODEL_HPP

#include <array>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "degta/attention_global.hpp"
#include "degta/autograd.hpp"
#include "degta/dataset.hpp"
#include "degta/encodings.hpp"

namespace degta {

enum class Ablation { kFull, kCoupledAttention, kSummedIntegration, kNoGlobal, kDenseGlobal };
enum class TaskKind { kNode, kGraph };

std::string to_string(Ablation a);
std::string to_string(TaskKind t);
Ablation parse_ablation(std::string_view name);
TaskKind parse_task(std::string_view name);

struct DeGTAConfig {
  int k = 8;                ///< receptive field of the encodings
  int hidden = 32;          ///< attribute width d
  int struct_dim = 0;       ///< d_s, 0 means k
  int pos_dim = 0;          ///< d_p, 0 means k
  int score_dim = 16;       ///< d', positional/structural attention width
  int attr_score_dim = 64;  ///< d'', attribute attention width
  int layers = 2;
  PeKind pe = PeKind::kJaccard;
  SeKind se = SeKind::kRwse;
  double bandwidth = 1.0;
  attn::SamplingStrategy sampling{attn::SamplingKind::kTopK, 0, 0.0};  ///< top_k 0 means k
  bool literal_softmax = false;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  std::uint64_t seed = 0;
  double dropout = 0.0;
  bool residual = false;
  Ablation ablation = Ablation::kFull;

  /// Copy with every "0 means default" field filled in.
  DeGTAConfig resolved() const;
  friend bool operator==(const DeGTAConfig&, const DeGTAConfig&) = default;
};

void validate(const DeGTAConfig& cfg);

/// Named parameter matrices in a fixed creation order.
struct ParameterSet {
  struct Entry {
    std::string name;
    Matrix value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  void add(std::string name, Matrix value);
  const Matrix& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t scalar_count() const;
  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// Glorot-uniform matrices, zero biases and zero view logits.
ParameterSet init_parameters(const DeGTAConfig& cfg, std::size_t input_dim, std::size_t num_outputs);

/// Parameters placed on a tape, looked up by name.
class BoundParams {
 public:
  BoundParams() = default;
  BoundParams(ad::Tape& tape, const ParameterSet& params, bool trainable);
  void set(const std::string& name, ad::Tensor t) { map_[name] = t; }
  const ad::Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return map_.count(name) != 0; }

 private:
  std::unordered_map<std::string, ad::Tensor> map_;
};

/// Everything about one graph that does not depend on parameters.
struct GraphContext {
  const Graph* graph = nullptr;
  Matrix se;                        ///< N x K structural encoding (initial S)
  Matrix pe;                        ///< N x K positional encoding (initial P)
  ad::SparsePattern neighborhoods;  ///< neighbors plus self
  Matrix candidates;                ///< 1 - A - I, or off-diagonal for dense_global
  ad::SparsePattern all_pairs;      ///< only filled for dense_global
};

GraphContext make_context(const Graph& g, const DeGTAConfig& cfg);

struct ForwardOptions {
  bool training = false;
  std::mt19937_64* rng = nullptr;  ///< required when training with dropout
  bool surrogate = false;          ///< smooth sampling for gradient checks
  bool trace = false;              ///< record attention values
};

/// Attention values of one layer, copied off the tape.
struct LayerTrace {
  std::array<double, 3> local_weights{};  ///< softmaxed (positional, structural, attribute)
  std::array<double, 3> global_weights{};
  bool has_global = true;
  std::vector<NodeId> local_rows, local_cols;
  std::vector<double> local_s, local_p, local_a, local_z;
  std::vector<NodeId> global_rows, global_cols;
  std::vector<double> global_us, global_up, global_ua, global_z;
};

struct ForwardResult {
  ad::Tensor embeddings;  ///< N x d
  ad::Tensor output;      ///< N x C (node task) or 1 x C (graph task)
  std::vector<LayerTrace> traces;
};

/// One layer: encoders, local and global channels, integration.
ad::Tensor layer_forward(const BoundParams& params, int layer, const GraphContext& ctx, const DeGTAConfig& cfg,
                         const ad::Tensor& se, const ad::Tensor& pe, const ad::Tensor& h_prev,
                         const ForwardOptions& opts, LayerTrace* trace = nullptr);

ForwardResult model_forward(ad::Tape& tape, const BoundParams& params, const GraphContext& ctx, const DeGTAConfig& cfg,
                            TaskKind task, const ForwardOptions& opts = {});

struct Model {
  DeGTAConfig config;  ///< resolved
  std::size_t input_dim = 0;
  std::size_t num_outputs = 0;
  TaskKind task = TaskKind::kNode;
  bool regression = false;
  ParameterSet params;
  friend bool operator==(const Model&, const Model&) = default;
};

Model make_model(const DeGTAConfig& cfg, std::size_t input_dim, std::size_t num_outputs, TaskKind task,
                 bool regression);

/// Decoupled-weight-decay Adam over a ParameterSet.
class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(ParameterSet& params, const std::vector<Matrix>& grads);
  long steps() const noexcept { return t_; }

 private:
  double lr_, wd_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_metric = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  Model model;  ///< parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

TrainResult train_node(const Graph& g, const DeGTAConfig& cfg);
TrainResult train_graph(const GraphDataset& ds, const DeGTAConfig& cfg);

/// Accuracy (classification) or mean absolute error (regression) per split.
struct Metrics {
  std::string metric;  ///< "accuracy" or "mae"
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

Metrics evaluate_node(const Model& model, const Graph& g);
Metrics evaluate_graph(const Model& model, const GraphDataset& ds);

/// Inference-mode forward with attention traces.
ForwardResult run_inference(const Model& model, ad::Tape& tape, const GraphContext& ctx, bool trace);

}  // namespace degta

#endif  // DEGTA_MODEL_HPP
