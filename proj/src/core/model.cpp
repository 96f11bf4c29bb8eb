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

#include "degta/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "degta/attention_local.hpp"
#include "degta/error.hpp"

namespace degta {

namespace {

std::string layer_name(int layer, std::string_view suffix) {
  return "layer" + std::to_string(layer) + "." + std::string(suffix);
}

bool has_global(Ablation a) { return a != Ablation::kNoGlobal; }
bool has_integration_weights(Ablation a) { return a != Ablation::kSummedIntegration; }

ad::Tensor mlp(const BoundParams& p, const std::string& prefix, const ad::Tensor& x) {
  const ad::Tensor hidden =
      ad::leaky_relu(ad::add_row(ad::matmul(x, p.at(prefix + ".w1")), p.at(prefix + ".b1")), attn::kLeakySlope);
  return ad::add_row(ad::matmul(hidden, p.at(prefix + ".w2")), p.at(prefix + ".b2"));
}

std::vector<double> copy_values(const ad::Tensor& t) {
  const auto v = t.value().values();
  return {v.begin(), v.end()};
}

std::array<double, 3> triple(const ad::Tensor& w) { return {w.value()[0], w.value()[1], w.value()[2]}; }

std::size_t argmax_row(const Matrix& m, std::size_t r) {
  const auto row = m.row(r);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

/// Mean softmax cross-entropy of the selected rows, computed off-tape.
double cross_entropy_value(const Matrix& logits, std::span<const NodeId> rows, std::span<const int> labels) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = logits.row(rows[i]);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    total += std::log(s) + mx - row[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(rows.size());
}

double accuracy(const Matrix& logits, std::span<const NodeId> rows, std::span<const int> labels) {
  if (rows.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (argmax_row(logits, rows[i]) == static_cast<std::size_t>(labels[i])) ++hit;
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

std::vector<int> labels_at(const Graph& g, std::span<const NodeId> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (NodeId r : rows) out.push_back(g.labels()[r]);
  return out;
}

bool better(const EpochRecord& cand, const EpochRecord& best, bool lower_is_better) {
  if (cand.val_metric != best.val_metric)
    return lower_is_better ? cand.val_metric < best.val_metric : cand.val_metric > best.val_metric;
  return cand.val_loss < best.val_loss;
}

void require_finite(double loss, int epoch) {
  require(std::isfinite(loss), ErrorKind::kNumeric, [&] {
    return "training loss became non-finite at epoch " + std::to_string(epoch) + " (try a lower learning rate)";
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kCoupledAttention:
      return "coupled_attention";
    case Ablation::kSummedIntegration:
      return "summed_integration";
    case Ablation::kNoGlobal:
      return "no_global";
    case Ablation::kDenseGlobal:
      return "dense_global";
  }
  return "full";
}

std::string to_string(TaskKind t) { return t == TaskKind::kNode ? "node" : "graph"; }

Ablation parse_ablation(std::string_view name) {
  for (Ablation a : {Ablation::kFull, Ablation::kCoupledAttention, Ablation::kSummedIntegration, Ablation::kNoGlobal,
                     Ablation::kDenseGlobal})
    if (name == to_string(a)) return a;
  fail(ErrorKind::kUsage, "unknown ablation '" + std::string(name) +
                              "' (expected full, coupled_attention, summed_integration, no_global or dense_global)");
}

TaskKind parse_task(std::string_view name) {
  if (name == "node") return TaskKind::kNode;
  if (name == "graph") return TaskKind::kGraph;
  fail(ErrorKind::kUsage, "unknown task '" + std::string(name) + "' (expected node or graph)");
}

DeGTAConfig DeGTAConfig::resolved() const {
  DeGTAConfig c = *this;
  if (c.struct_dim == 0) c.struct_dim = c.k;
  if (c.pos_dim == 0) c.pos_dim = c.k;
  if (c.sampling.kind == attn::SamplingKind::kTopK && c.sampling.top_k == 0) c.sampling.top_k = c.k;
  return c;
}

void validate(const DeGTAConfig& cfg) {
  auto positive = [](int v, const char* what) {
    require(v >= 1, ErrorKind::kValidation,
            [&] { return std::string(what) + " must be >= 1, got " + std::to_string(v); });
  };
  positive(cfg.k, "k");
  positive(cfg.hidden, "hidden");
  positive(cfg.struct_dim, "structural width");
  positive(cfg.pos_dim, "positional width");
  positive(cfg.score_dim, "attention width");
  positive(cfg.attr_score_dim, "attribute attention width");
  positive(cfg.layers, "layers");
  positive(cfg.epochs, "epochs");
  require(cfg.learning_rate > 0.0 && std::isfinite(cfg.learning_rate), ErrorKind::kValidation,
          "learning rate must be positive");
  require(cfg.weight_decay >= 0.0, ErrorKind::kValidation, "weight decay must be >= 0");
  require(cfg.dropout >= 0.0 && cfg.dropout < 1.0, ErrorKind::kValidation,
          [&] { return "dropout must lie in [0, 1), got " + std::to_string(cfg.dropout); });
  require(cfg.bandwidth > 0.0, ErrorKind::kValidation, "bandwidth must be positive");
  attn::validate(cfg.sampling);
}

// ---------------------------------------------------------------------------
// Parameters

void ParameterSet::add(std::string name, Matrix value) {
  require(!contains(name), ErrorKind::kValidation, [&] { return "duplicate parameter '" + name + "'"; });
  entries.push_back({std::move(name), std::move(value)});
}

const Matrix& ParameterSet::at(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return e.value;
  fail(ErrorKind::kValidation, "missing parameter '" + std::string(name) + "'");
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(entries.begin(), entries.end(), [&](const Entry& e) { return e.name == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.value.size();
  return n;
}

ParameterSet init_parameters(const DeGTAConfig& raw, std::size_t input_dim, std::size_t num_outputs) {
  const DeGTAConfig cfg = raw.resolved();
  validate(cfg);
  require(input_dim >= 1 && num_outputs >= 1, ErrorKind::kValidation, "input and output widths must be >= 1");
  std::mt19937_64 rng(cfg.seed);
  ParameterSet ps;
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-a, a);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = u(rng);
    return m;
  };
  auto mlp_params = [&](const std::string& prefix, std::size_t in, std::size_t width) {
    ps.add(prefix + ".w1", glorot(in, width));
    ps.add(prefix + ".b1", Matrix(1, width));
    ps.add(prefix + ".w2", glorot(width, width));
    ps.add(prefix + ".b2", Matrix(1, width));
  };

  const auto k = static_cast<std::size_t>(cfg.k);
  const auto d = static_cast<std::size_t>(cfg.hidden);
  const auto ds = static_cast<std::size_t>(cfg.struct_dim);
  const auto dp = static_cast<std::size_t>(cfg.pos_dim);
  const auto d1 = static_cast<std::size_t>(cfg.score_dim);
  const auto d2 = static_cast<std::size_t>(cfg.attr_score_dim);

  if (input_dim != d) ps.add("input_proj", glorot(input_dim, d));
  for (int l = 0; l < cfg.layers; ++l) {
    auto name = [l](std::string_view s) { return layer_name(l, s); };
    mlp_params(name("enc_s"), k, ds);
    mlp_params(name("enc_p"), k, dp);
    mlp_params(name("enc_a"), d, d);
    if (cfg.ablation == Ablation::kCoupledAttention) {
      const std::size_t cw = ds + dp + d;
      ps.add(name("local.w_c"), glorot(cw, d2));
      ps.add(name("local.q_c"), glorot(2 * d2, 1));
      ps.add(name("global.w_cq"), glorot(cw, d2));
      ps.add(name("global.w_ck"), glorot(cw, d2));
    } else {
      ps.add(name("local.w_str"), glorot(ds, d1));
      ps.add(name("local.w_pos"), glorot(dp, d1));
      ps.add(name("local.w_atr"), glorot(d, d2));
      ps.add(name("local.q_s"), glorot(2 * d1, 1));
      ps.add(name("local.q_p"), glorot(2 * d1, 1));
      ps.add(name("local.q_a"), glorot(2 * d2, 1));
      ps.add(name("local.view_logits"), Matrix(1, 3));
      if (has_global(cfg.ablation)) {
        ps.add(name("global.w_sq"), glorot(ds, d1));
        ps.add(name("global.w_sk"), glorot(ds, d1));
        ps.add(name("global.w_pq"), glorot(dp, d1));
        ps.add(name("global.w_pk"), glorot(dp, d1));
        ps.add(name("global.w_aq"), glorot(d, d2));
        ps.add(name("global.w_ak"), glorot(d, d2));
        ps.add(name("global.view_logits"), Matrix(1, 3));
      }
    }
    if (has_integration_weights(cfg.ablation)) {
      ps.add(name("w_l"), glorot(d, d));
      if (has_global(cfg.ablation)) ps.add(name("w_g"), glorot(d, d));
    }
  }
  ps.add("head.w", glorot(d, num_outputs));
  ps.add("head.b", Matrix(1, num_outputs));
  return ps;
}

BoundParams::BoundParams(ad::Tape& tape, const ParameterSet& params, bool trainable) {
  for (const auto& e : params.entries) map_[e.name] = trainable ? tape.variable(e.value) : tape.constant(e.value);
}

const ad::Tensor& BoundParams::at(const std::string& name) const {
  auto it = map_.find(name);
  require(it != map_.end(), ErrorKind::kValidation, [&] { return "parameter '" + name + "' is not bound"; });
  return it->second;
}

// ---------------------------------------------------------------------------
// Forward pass

GraphContext make_context(const Graph& g, const DeGTAConfig& raw) {
  const DeGTAConfig cfg = raw.resolved();
  GraphContext ctx;
  ctx.graph = &g;
  EncodingOptions eo;
  eo.pe = cfg.pe;
  eo.se = cfg.se;
  eo.k = cfg.k;
  eo.bandwidth = cfg.bandwidth;
  EncodingSet enc = encode(g, eo);
  ctx.se = std::move(enc.se);
  ctx.pe = std::move(enc.pe);
  ctx.neighborhoods = ad::SparsePattern::from_graph(g, /*include_self=*/true);
  if (cfg.ablation == Ablation::kDenseGlobal) {
    ctx.candidates = attn::off_diagonal_mask(g.num_nodes());
    ctx.all_pairs = ad::SparsePattern::from_nonzeros(ctx.candidates);
  } else if (has_global(cfg.ablation)) {
    ctx.candidates = attn::candidate_mask(g);
  }
  return ctx;
}

ad::Tensor layer_forward(const BoundParams& p, int layer, const GraphContext& ctx, const DeGTAConfig& cfg,
                         const ad::Tensor& se, const ad::Tensor& pe, const ad::Tensor& h_prev,
                         const ForwardOptions& opts, LayerTrace* trace) {
  auto name = [layer](std::string_view s) { return layer_name(layer, s); };
  ad::Tape& tape = h_prev.tape();
  const ad::Tensor s_l = mlp(p, name("enc_s"), se);
  const ad::Tensor p_l = mlp(p, name("enc_p"), pe);
  ad::Tensor h_l = mlp(p, name("enc_a"), h_prev);
  if (opts.training && cfg.dropout > 0.0) {
    require(opts.rng != nullptr, ErrorKind::kValidation, "dropout needs a random generator");
    h_l = ad::dropout(h_l, cfg.dropout, *opts.rng);
  }
  const bool coupled = cfg.ablation == Ablation::kCoupledAttention;
  const ad::SparsePattern& nbhd = ctx.neighborhoods;

  // Local channel.
  attn::LocalScores local;
  ad::Tensor z_local;
  std::optional<ad::Tensor> joint;
  if (coupled) {
    joint = ad::concat_cols(ad::concat_cols(s_l, p_l), h_l);
    z_local = attn::pair_score(*joint, p.at(name("local.w_c")), p.at(name("local.q_c")), nbhd);
    local = {z_local, z_local, z_local};
  } else {
    const attn::LocalAttentionParams lp{
        p.at(name("local.w_str")), p.at(name("local.w_pos")), p.at(name("local.w_atr")),      p.at(name("local.q_s")),
        p.at(name("local.q_p")),   p.at(name("local.q_a")),   p.at(name("local.view_logits"))};
    local = attn::local_scores(s_l, p_l, h_l, nbhd, lp);
    z_local = attn::local_integrate(local, lp.view_logits);
  }
  const attn::LocalAggregation loc = attn::local_aggregate(z_local, h_l, nbhd);

  if (trace) {
    trace->local_weights = coupled ? std::array<double, 3>{1.0 / 3, 1.0 / 3, 1.0 / 3}
                                   : triple(attn::view_weights(p.at(name("local.view_logits"))));
    trace->local_rows = nbhd.rows;
    trace->local_cols = nbhd.cols;
    trace->local_s = copy_values(local.s);
    trace->local_p = copy_values(local.p);
    trace->local_a = copy_values(local.a);
    trace->local_z = copy_values(loc.weights);
  }

  // Global channel.
  std::optional<ad::Tensor> global_out;
  if (has_global(cfg.ablation)) {
    const ad::SparsePattern* support = nullptr;
    std::optional<ad::Tensor> gate;
    ad::Tensor us, up, ua, weights;
    if (coupled) {
      const ad::Tensor u_c = attn::dense_attention(*joint, p.at(name("global.w_cq")), p.at(name("global.w_ck")));
      const ad::Tensor halves = tape.constant(Matrix(1, 3, std::vector<double>{0.5, 0.5, 0.0}));
      const attn::SampleScores sc = attn::sample_scores(u_c, u_c, ctx.candidates, halves, cfg.literal_softmax);
      const attn::GlobalSample smp = attn::sample(sc.m, ctx.candidates, cfg.sampling, opts.surrogate);
      support = smp.support;
      us = up = ua = ad::gather_entries(u_c, *support);
      weights = ad::segment_softmax(ad::add(us, ad::log(smp.gate)), *support);
      global_out = ad::segment_aggregate(weights, h_l, *support);
      if (trace) trace->global_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    } else {
      const attn::GlobalAttentionParams gp{p.at(name("global.w_sq")),       p.at(name("global.w_sk")),
                                           p.at(name("global.w_pq")),       p.at(name("global.w_pk")),
                                           p.at(name("global.w_aq")),       p.at(name("global.w_ak")),
                                           p.at(name("global.view_logits"))};
      const ad::Tensor gw = attn::view_weights(gp.view_logits);
      const attn::ViewAttention u = attn::global_view_attention(s_l, p_l, gp);
      if (cfg.ablation == Ablation::kDenseGlobal) {
        support = &ctx.all_pairs;
      } else {
        const attn::SampleScores sc = attn::sample_scores(u.u_s, u.u_p, ctx.candidates, gw, cfg.literal_softmax);
        const attn::GlobalSample smp = attn::sample(sc.m, ctx.candidates, cfg.sampling, opts.surrogate);
        support = smp.support;
        gate = smp.gate;
      }
      ua = attn::sampled_attribute_attention(h_l, gp.w_aq, gp.w_ak, *support);
      const attn::GlobalAggregation agg = attn::global_aggregate(u.u_s, u.u_p, ua, gate, h_l, *support, gw);
      us = agg.us;
      up = agg.up;
      weights = agg.weights;
      global_out = agg.out;
      if (trace) trace->global_weights = triple(gw);
    }
    if (trace) {
      trace->global_rows = support->rows;
      trace->global_cols = support->cols;
      trace->global_us = copy_values(us);
      trace->global_up = copy_values(up);
      trace->global_ua = copy_values(ua);
      trace->global_z = copy_values(weights);
    }
  } else if (trace) {
    trace->global_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    trace->has_global = false;
  }

  // Integration.
  ad::Tensor h_next;
  if (cfg.ablation == Ablation::kSummedIntegration) {
    h_next = ad::add(loc.out, *global_out);
  } else {
    h_next = ad::matmul(loc.out, p.at(name("w_l")));
    if (global_out) h_next = ad::add(h_next, ad::matmul(*global_out, p.at(name("w_g"))));
  }
  if (cfg.residual) h_next = ad::add(h_next, h_prev);
  return h_next;
}

ForwardResult model_forward(ad::Tape& tape, const BoundParams& params, const GraphContext& ctx, const DeGTAConfig& raw,
                            TaskKind task, const ForwardOptions& opts) {
  const DeGTAConfig cfg = raw.resolved();
  require(ctx.graph != nullptr, ErrorKind::kValidation, "model_forward: missing graph context");
  const Graph& g = *ctx.graph;
  require(ctx.se.rows() == g.num_nodes() && ctx.pe.rows() == g.num_nodes(), ErrorKind::kValidation,
          "model_forward: encodings missing for this graph");
  require(g.num_nodes() > 0, ErrorKind::kValidation, "model_forward: empty graph");
  const ad::Tensor se = tape.constant(ctx.se);
  const ad::Tensor pe = tape.constant(ctx.pe);
  ad::Tensor h = tape.constant(g.features());
  if (params.contains("input_proj")) h = ad::matmul(h, params.at("input_proj"));
  ForwardResult out;
  if (opts.trace) out.traces.resize(static_cast<std::size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l)
    h = layer_forward(params, l, ctx, cfg, se, pe, h, opts, opts.trace ? &out.traces[l] : nullptr);
  out.embeddings = h;
  const ad::Tensor pooled = task == TaskKind::kGraph ? ad::mean_rows(h) : h;
  out.output = ad::add_row(ad::matmul(pooled, params.at("head.w")), params.at("head.b"));
  return out;
}

Model make_model(const DeGTAConfig& cfg, std::size_t input_dim, std::size_t num_outputs, TaskKind task,
                 bool regression) {
  Model m;
  m.config = cfg.resolved();
  m.input_dim = input_dim;
  m.num_outputs = num_outputs;
  m.task = task;
  m.regression = regression;
  m.params = init_parameters(m.config, input_dim, num_outputs);
  return m;
}

ForwardResult run_inference(const Model& model, ad::Tape& tape, const GraphContext& ctx, bool trace) {
  require(ctx.graph != nullptr && ctx.graph->feature_dim() == model.input_dim, ErrorKind::kValidation, [&] {
    return "feature width " + std::to_string(ctx.graph ? ctx.graph->feature_dim() : 0) +
           " does not match the model input width " + std::to_string(model.input_dim);
  });
  const BoundParams bp(tape, model.params, /*trainable=*/false);
  ForwardOptions opts;
  opts.trace = trace;
  return model_forward(tape, bp, ctx, model.config, model.task, opts);
}

// ---------------------------------------------------------------------------
// Optimizer

AdamW::AdamW(double lr, double weight_decay, double beta1, double beta2, double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}

void AdamW::step(ParameterSet& params, const std::vector<Matrix>& grads) {
  require(grads.size() == params.entries.size(), ErrorKind::kValidation, "AdamW: gradient count mismatch");
  if (m_.empty()) {
    for (const auto& e : params.entries) {
      m_.emplace_back(e.value.rows(), e.value.cols());
      v_.emplace_back(e.value.rows(), e.value.cols());
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Matrix& w = params.entries[i].value;
    require(grads[i].same_shape(w), ErrorKind::kValidation,
            [&] { return "AdamW: gradient shape mismatch for '" + params.entries[i].name + "'"; });
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double g = grads[i][j];
      m_[i][j] = b1_ * m_[i][j] + (1.0 - b1_) * g;
      v_[i][j] = b2_ * v_[i][j] + (1.0 - b2_) * g * g;
      const double mhat = m_[i][j] / c1;
      const double vhat = v_[i][j] / c2;
      w[j] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * w[j]);
    }
  }
}

// ---------------------------------------------------------------------------
// Training and evaluation

namespace {

int node_class_count(const Graph& g) {
  require(g.has_labels(), ErrorKind::kValidation, "node training needs labels");
  int mx = -1;
  for (int y : g.labels()) {
    require(y >= 0, ErrorKind::kValidation, "labels must be non-negative class indices");
    mx = std::max(mx, y);
  }
  return mx + 1;
}

std::vector<Matrix> collect_grads(const ParameterSet& ps, const BoundParams& bp) {
  std::vector<Matrix> grads;
  grads.reserve(ps.entries.size());
  for (const auto& e : ps.entries) grads.push_back(bp.at(e.name).grad());
  return grads;
}

ad::Tensor graph_loss(const ad::Tensor& output, double target, bool regression) {
  if (regression) return ad::l1_loss(output, Matrix(1, 1, target));
  const int label = static_cast<int>(target);
  return ad::cross_entropy(output, std::span<const int>(&label, 1));
}

/// Loss and metric of one graph-level prediction, computed off-tape.
std::pair<double, double> graph_score(const Matrix& out, double target, bool regression) {
  if (regression) {
    const double err = std::abs(out[0] - target);
    return {err, err};
  }
  const NodeId row = 0;
  const int label = static_cast<int>(target);
  return {cross_entropy_value(out, std::span<const NodeId>(&row, 1), std::span<const int>(&label, 1)),
          argmax_row(out, 0) == static_cast<std::size_t>(label) ? 1.0 : 0.0};
}

}  // namespace

TrainResult train_node(const Graph& g, const DeGTAConfig& raw) {
  const DeGTAConfig cfg = raw.resolved();
  validate(cfg);
  const int classes = node_class_count(g);
  validate_splits(g);
  const Splits& sp = g.splits();
  require(!sp.train.empty(), ErrorKind::kValidation, "node training needs a non-empty train split");
  const std::vector<int> y_train = labels_at(g, sp.train);
  const std::vector<int> y_val = labels_at(g, sp.val);
  const bool has_val = !sp.val.empty();

  TrainResult result;
  result.model = make_model(cfg, g.feature_dim(), static_cast<std::size_t>(classes), TaskKind::kNode, false);
  Model& model = result.model;
  const GraphContext ctx = make_context(g, cfg);
  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  ParameterSet best = model.params;
  EpochRecord best_rec;
  bool have_best = false;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    ad::Tape tape;
    const BoundParams bp(tape, model.params, /*trainable=*/true);
    ForwardOptions fo;
    fo.training = true;
    fo.rng = &rng;
    const ForwardResult fr = model_forward(tape, bp, ctx, cfg, TaskKind::kNode, fo);
    const ad::Tensor loss = ad::cross_entropy(ad::gather_rows(fr.output, sp.train), y_train);
    const double loss_value = loss.value()[0];
    require_finite(loss_value, epoch);
    tape.backward(loss);

    Matrix logits = fr.output.value();
    if (cfg.dropout > 0.0) {
      ad::Tape eval_tape;
      logits = run_inference(model, eval_tape, ctx, false).output.value();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_value;
    rec.train_metric = accuracy(logits, sp.train, y_train);
    rec.val_loss = has_val ? cross_entropy_value(logits, sp.val, y_val) : loss_value;
    rec.val_metric = has_val ? accuracy(logits, sp.val, y_val) : rec.train_metric;
    result.history.push_back(rec);
    if (!have_best || better(rec, best_rec, false)) {
      best = model.params;
      best_rec = rec;
      have_best = true;
      result.best_epoch = epoch;
    }
    opt.step(model.params, collect_grads(model.params, bp));
  }
  model.params = std::move(best);
  return result;
}

TrainResult train_graph(const GraphDataset& ds, const DeGTAConfig& raw) {
  const DeGTAConfig cfg = raw.resolved();
  validate(cfg);
  require(ds.size() > 0, ErrorKind::kValidation, "graph training needs at least one graph");
  require(!ds.splits.train.empty(), ErrorKind::kValidation, "graph training needs a non-empty train split");
  const bool regression = ds.regression;
  const bool has_val = !ds.splits.val.empty();

  TrainResult result;
  result.model =
      make_model(cfg, ds.feature_dim(), static_cast<std::size_t>(ds.num_outputs()), TaskKind::kGraph, regression);
  Model& model = result.model;
  std::vector<GraphContext> contexts;
  contexts.reserve(ds.size());
  for (const Graph& g : ds.graphs) contexts.push_back(make_context(g, cfg));

  AdamW opt(cfg.learning_rate, cfg.weight_decay);
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  ParameterSet best = model.params;
  EpochRecord best_rec;
  bool have_best = false;
  const double inv_train = 1.0 / static_cast<double>(ds.splits.train.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Matrix> grads;
    for (const auto& e : model.params.entries) grads.emplace_back(e.value.rows(), e.value.cols());
    double train_loss = 0.0, train_metric = 0.0;
    for (NodeId gi : ds.splits.train) {
      ad::Tape tape;
      const BoundParams bp(tape, model.params, /*trainable=*/true);
      ForwardOptions fo;
      fo.training = true;
      fo.rng = &rng;
      const ForwardResult fr = model_forward(tape, bp, contexts[gi], cfg, TaskKind::kGraph, fo);
      const ad::Tensor loss = ad::scale(graph_loss(fr.output, ds.targets[gi], regression), inv_train);
      tape.backward(loss);
      const auto [l, m] = graph_score(fr.output.value(), ds.targets[gi], regression);
      train_loss += l * inv_train;
      train_metric += m * inv_train;
      const std::vector<Matrix> g = collect_grads(model.params, bp);
      for (std::size_t i = 0; i < grads.size(); ++i)
        for (std::size_t j = 0; j < grads[i].size(); ++j) grads[i][j] += g[i][j];
    }
    require_finite(train_loss, epoch);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    rec.train_metric = train_metric;
    if (has_val) {
      double vl = 0.0, vm = 0.0;
      for (NodeId gi : ds.splits.val) {
        ad::Tape tape;
        const auto [l, m] =
            graph_score(run_inference(model, tape, contexts[gi], false).output.value(), ds.targets[gi], regression);
        vl += l;
        vm += m;
      }
      rec.val_loss = vl / static_cast<double>(ds.splits.val.size());
      rec.val_metric = vm / static_cast<double>(ds.splits.val.size());
    } else {
      rec.val_loss = train_loss;
      rec.val_metric = train_metric;
    }
    result.history.push_back(rec);
    if (!have_best || better(rec, best_rec, regression)) {
      best = model.params;
      best_rec = rec;
      have_best = true;
      result.best_epoch = epoch;
    }
    opt.step(model.params, grads);
  }
  model.params = std::move(best);
  return result;
}

Metrics evaluate_node(const Model& model, const Graph& g) {
  require(model.task == TaskKind::kNode, ErrorKind::kValidation, "model was trained for graph-level prediction");
  require(g.has_labels(), ErrorKind::kValidation, "evaluation needs labels");
  validate_splits(g);
  for (int y : g.labels())
    require(y >= 0 && static_cast<std::size_t>(y) < model.num_outputs, ErrorKind::kValidation, [&] {
      return "label " + std::to_string(y) + " is outside the model's " + std::to_string(model.num_outputs) + " classes";
    });
  const GraphContext ctx = make_context(g, model.config);
  ad::Tape tape;
  const Matrix logits = run_inference(model, tape, ctx, false).output.value();
  const Splits& sp = g.splits();
  Metrics m;
  m.metric = "accuracy";
  m.train = accuracy(logits, sp.train, labels_at(g, sp.train));
  m.val = accuracy(logits, sp.val, labels_at(g, sp.val));
  m.test = accuracy(logits, sp.test, labels_at(g, sp.test));
  return m;
}

Metrics evaluate_graph(const Model& model, const GraphDataset& ds) {
  require(model.task == TaskKind::kGraph, ErrorKind::kValidation, "model was trained for node-level prediction");
  require(model.regression == ds.regression, ErrorKind::kValidation,
          "dataset targets do not match the model's task (classification vs regression)");
  if (!ds.regression)
    for (std::size_t i = 0; i < ds.size(); ++i)
      require(ds.targets[i] >= 0 && ds.targets[i] < static_cast<double>(model.num_outputs), ErrorKind::kValidation,
              [&] {
                return "target of graph '" + ds.names[i] + "' is outside the model's " +
                       std::to_string(model.num_outputs) + " classes";
              });
  Metrics m;
  m.metric = ds.regression ? "mae" : "accuracy";
  auto score = [&](const std::vector<NodeId>& idx) {
    if (idx.empty()) return 0.0;
    double total = 0.0;
    for (NodeId gi : idx) {
      const GraphContext ctx = make_context(ds.graphs[gi], model.config);
      ad::Tape tape;
      total += graph_score(run_inference(model, tape, ctx, false).output.value(), ds.targets[gi], ds.regression).second;
    }
    return total / static_cast<double>(idx.size());
  };
  m.train = score(ds.splits.train);
  m.val = score(ds.splits.val);
  m.test = score(ds.splits.test);
  return m;
}

}  // namespace degta
