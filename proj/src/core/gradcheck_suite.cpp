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
#include <chrono>
#include <random>

#include "degta/attention_global.hpp"
#include "degta/attention_local.hpp"
#include "degta/generators.hpp"
#include "degta/gradcheck.hpp"
#include "degta/model.hpp"

namespace degta {

namespace {

using ad::Tape;
using ad::Tensor;
using Inputs = std::span<const Tensor>;

class Suite {
 public:
  Suite(double eps, std::uint64_t seed) : eps_(eps), rng_(seed) {}

  Matrix uniform(std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = u(rng_);
    return m;
  }

  /// Entries with magnitude in [0.1, 1] and random sign, away from kinks at 0.
  Matrix away_from_zero(std::size_t rows, std::size_t cols) {
    Matrix m = uniform(rows, cols, 0.1, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (double& v : m.values())
      if (coin(rng_)) v = -v;
    return m;
  }

  std::mt19937_64& rng() { return rng_; }

  /// Weighted sum with fixed random weights so every output entry matters.
  ScalarFn weighted(std::function<Tensor(Tape&, Inputs)> f) {
    auto weights = std::make_shared<std::optional<Matrix>>();
    auto seed = rng_();
    return [f, weights, seed](Tape& t, Inputs in) {
      const Tensor y = f(t, in);
      if (!*weights) {
        std::mt19937_64 r(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Matrix w(y.rows(), y.cols());
        for (double& v : w.values()) v = u(r);
        *weights = std::move(w);
      }
      return ad::sum(ad::elementwise_mul(y, t.constant(**weights)));
    };
  }

  void check(const std::string& name, const ScalarFn& f, const std::vector<Matrix>& inputs) {
    add(name, grad_check(f, inputs, eps_));
  }

  void check(const std::string& name, const ScalarFn& f, const ScalarFn& reference, const std::vector<Matrix>& inputs) {
    add(name, grad_check(f, reference, inputs, eps_));
  }

  /// Draws inputs until no non-smooth op sits within kKinkMargin of its
  /// kink, then checks.
  void check_drawn(const std::string& name, const ScalarFn& f, const std::function<std::vector<Matrix>()>& draw) {
    std::vector<Matrix> inputs;
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
      inputs = draw();
      Tape t;
      std::vector<Tensor> xs;
      for (const auto& m : inputs) xs.push_back(t.constant(m));
      f(t, xs);
      if (t.kink_distance() >= kKinkMargin) break;
    }
    check(name, f, inputs);
  }

  GradCheckSuiteReport report;

 private:
  static constexpr double kKinkMargin = 1e-3;
  static constexpr int kMaxDraws = 64;

  void add(const std::string& name, const GradCheckResult& r) {
    report.lines.push_back({name, r});
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
  }

  double eps_;
  std::mt19937_64 rng_;
};

void primitives(Suite& s, const ad::SparsePattern& pat) {
  using namespace ad;
  const std::size_t n = pat.num_rows;
  s.check("primitive:matmul", s.weighted([](Tape&, Inputs x) { return matmul(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(4, 2)});
  s.check("primitive:matmul_nt", s.weighted([](Tape&, Inputs x) { return matmul_nt(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(2, 4)});
  s.check("primitive:transpose", s.weighted([](Tape&, Inputs x) { return transpose(x[0]); }), {s.uniform(3, 4)});
  s.check("primitive:add", s.weighted([](Tape&, Inputs x) { return add(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(3, 4)});
  s.check("primitive:sub", s.weighted([](Tape&, Inputs x) { return sub(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(3, 4)});
  s.check("primitive:add_row", s.weighted([](Tape&, Inputs x) { return add_row(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(1, 4)});
  s.check("primitive:scale", s.weighted([](Tape&, Inputs x) { return scale(x[0], 1.7); }), {s.uniform(3, 4)});
  s.check("primitive:mul_scalar", s.weighted([](Tape&, Inputs x) { return mul_scalar(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(1, 1)});
  s.check("primitive:elementwise_mul", s.weighted([](Tape&, Inputs x) { return elementwise_mul(x[0], x[1]); }),
          {s.uniform(3, 4), s.uniform(3, 4)});
  s.check("primitive:concat_cols", s.weighted([](Tape&, Inputs x) { return concat_cols(x[0], x[1]); }),
          {s.uniform(3, 2), s.uniform(3, 3)});
  s.check("primitive:concat_rows", s.weighted([](Tape&, Inputs x) { return concat_rows(x[0], x[1]); }),
          {s.uniform(2, 3), s.uniform(4, 3)});
  s.check("primitive:slice_cols", s.weighted([](Tape&, Inputs x) { return slice_cols(x[0], 1, 4); }),
          {s.uniform(3, 5)});
  s.check("primitive:leaky_relu", s.weighted([](Tape&, Inputs x) { return leaky_relu(x[0], 0.2); }),
          {s.away_from_zero(3, 4)});
  s.check("primitive:exp", s.weighted([](Tape&, Inputs x) { return ad::exp(x[0]); }), {s.uniform(3, 4)});
  s.check("primitive:log", s.weighted([](Tape&, Inputs x) { return ad::log(x[0]); }), {s.uniform(3, 4, 0.5, 2.0)});
  s.check("primitive:row_softmax", s.weighted([](Tape&, Inputs x) { return row_softmax(x[0]); }), {s.uniform(3, 4)});
  Matrix mask(3, 4, 1.0);
  mask(0, 1) = mask(1, 0) = mask(1, 3) = mask(2, 2) = 0.0;
  s.check("primitive:masked_row_softmax",
          s.weighted([mask](Tape&, Inputs x) { return masked_row_softmax(x[0], mask); }), {s.uniform(3, 4)});
  s.check("primitive:sum", s.weighted([](Tape&, Inputs x) { return sum(x[0]); }), {s.uniform(3, 4)});
  s.check("primitive:mean_rows", s.weighted([](Tape&, Inputs x) { return mean_rows(x[0]); }), {s.uniform(3, 4)});
  const std::vector<NodeId> index{2, 0, 2, 1};
  s.check("primitive:gather_rows", s.weighted([index](Tape&, Inputs x) { return gather_rows(x[0], index); }),
          {s.uniform(3, 4)});
  const std::vector<int> labels{0, 2, 1, 2};
  s.check("primitive:cross_entropy", [labels](Tape&, Inputs x) { return cross_entropy(x[0], labels); },
          {s.uniform(4, 3)});
  const Matrix target = s.uniform(3, 2);
  Matrix pred = s.away_from_zero(3, 2);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += target[i];
  s.check("primitive:l1_loss", [target](Tape&, Inputs x) { return l1_loss(x[0], target); }, {pred});
  const auto drop_seed = s.rng()();
  s.check("primitive:dropout", s.weighted([drop_seed](Tape&, Inputs x) {
    std::mt19937_64 r(drop_seed);
    return dropout(x[0], 0.3, r);
  }),
          {s.uniform(3, 4)});

  // Surrogate-gradient operations are compared against the function whose
  // gradient they pass through.
  Matrix hard(3, 4);
  for (std::size_t i = 0; i < hard.size(); i += 2) hard[i] = 1.0;
  const auto shared = std::make_shared<Matrix>(s.uniform(3, 4));
  const ScalarFn st_fn = [hard, shared](Tape& t, Inputs x) {
    return ad::sum(ad::elementwise_mul(straight_through(x[0], hard), t.constant(*shared)));
  };
  const ScalarFn thr_fn = [shared](Tape& t, Inputs x) {
    return ad::sum(ad::elementwise_mul(straight_through_threshold(x[0], 0.0), t.constant(*shared)));
  };
  const ScalarFn id_fn = [shared](Tape& t, Inputs x) {
    return ad::sum(ad::elementwise_mul(x[0], t.constant(*shared)));
  };
  const Matrix st_in = s.uniform(3, 4);
  s.check("primitive:straight_through", st_fn, id_fn, {st_in});
  s.check("primitive:straight_through_threshold", thr_fn, id_fn, {st_in});
  const Matrix frozen = s.uniform(3, 4);
  s.check(
      "primitive:stop_gradient",
      [shared](Tape& t, Inputs x) {
        return ad::sum(ad::elementwise_mul(ad::stop_gradient(x[0]), t.constant(*shared)));
      },
      [shared, frozen](Tape& t, Inputs) {
        return ad::sum(ad::elementwise_mul(t.constant(frozen), t.constant(*shared)));
      },
      {frozen});

  const ad::SparsePattern* p = &pat;
  s.check("primitive:segment_softmax", s.weighted([p](Tape&, Inputs x) { return segment_softmax(x[0], *p); }),
          {s.uniform(pat.nnz(), 1)});
  s.check("primitive:segment_aggregate", s.weighted([p](Tape&, Inputs x) { return segment_aggregate(x[0], x[1], *p); }),
          {s.uniform(pat.nnz(), 1), s.uniform(n, 3)});
  s.check("primitive:gather_entries", s.weighted([p](Tape&, Inputs x) { return gather_entries(x[0], *p); }),
          {s.uniform(n, n)});
  s.check("primitive:pair_dot", s.weighted([p](Tape&, Inputs x) { return pair_dot(x[0], x[1], *p); }),
          {s.uniform(n, 3), s.uniform(n, 3)});
}

/// Encoding -> two-layer encoder -> attention scores -> aggregation -> loss,
/// with gradients taken with respect to the encoding and encoder weights.
void encoding_paths(Suite& s, const Graph& g, const ad::SparsePattern& nbhd) {
  const int k = 4;
  const std::size_t width = 3, score = 4;
  const Matrix h = s.uniform(g.num_nodes(), 2);
  const ad::SparsePattern* p = &nbhd;
  const ScalarFn f = s.weighted([p, h](Tape& t, Inputs x) {
    const Tensor hidden = ad::leaky_relu(ad::add_row(ad::matmul(x[0], x[1]), x[2]), attn::kLeakySlope);
    const Tensor enc = ad::add_row(ad::matmul(hidden, x[3]), x[4]);
    const Tensor z = attn::pair_score(enc, x[5], x[6], *p);
    return ad::segment_aggregate(ad::segment_softmax(z, *p), t.constant(h), *p);
  });
  auto run = [&](const std::string& name, const Matrix& enc) {
    s.check_drawn("encoding:" + name, f, [&] {
      return std::vector<Matrix>{enc,
                                 s.uniform(static_cast<std::size_t>(k), width),
                                 s.uniform(1, width),
                                 s.uniform(width, width),
                                 s.uniform(1, width),
                                 s.uniform(width, score),
                                 s.uniform(2 * score, 1)};
    });
  };
  JaccardConfig jc;
  jc.cap = k;
  run("jaccard", jaccard_vector(g, jc));
  run("lappe", lap_pe(g, k));
  run("rwpe", rwpe(g, k));
  run("rwse", rwse(g, k));
  run("dse", dse(g, k));
  run("tcse", tcse(g, k));
}

void local_pipeline(Suite& s, const ad::SparsePattern& nbhd) {
  const std::size_t n = nbhd.num_rows, ds = 3, dp = 3, d = 4, d1 = 4, d2 = 5;
  const ad::SparsePattern* p = &nbhd;
  s.check_drawn("local:scores+integrate+aggregate", s.weighted([p](Tape&, Inputs x) {
    const attn::LocalAttentionParams lp{x[3], x[4], x[5], x[6], x[7], x[8], x[9]};
    const attn::LocalScores sc = attn::local_scores(x[0], x[1], x[2], *p, lp);
    return attn::local_aggregate(attn::local_integrate(sc, lp.view_logits), x[2], *p).out;
  }),
                [&] {
                  return std::vector<Matrix>{s.uniform(n, ds),     s.uniform(n, dp),     s.uniform(n, d),
                                             s.uniform(ds, d1),    s.uniform(dp, d1),    s.uniform(d, d2),
                                             s.uniform(2 * d1, 1), s.uniform(2 * d1, 1), s.uniform(2 * d2, 1),
                                             s.uniform(1, 3)};
                });
}

void global_pipeline(Suite& s, const Graph& g) {
  const std::size_t n = g.num_nodes(), ds = 3, dp = 3, d = 4, d1 = 4, d2 = 5;
  const Matrix cand = attn::candidate_mask(g);
  const ad::SparsePattern all = ad::SparsePattern::from_nonzeros(attn::off_diagonal_mask(n));
  auto inputs = [&] {
    return std::vector<Matrix>{s.uniform(n, ds),  s.uniform(n, dp),  s.uniform(n, d),   s.uniform(ds, d1),
                               s.uniform(ds, d1), s.uniform(dp, d1), s.uniform(dp, d1), s.uniform(d, d2),
                               s.uniform(d, d2),  s.uniform(1, 3)};
  };
  auto params = [](Inputs x) { return attn::GlobalAttentionParams{x[3], x[4], x[5], x[6], x[7], x[8], x[9]}; };
  for (const bool literal : {false, true}) {
    s.check_drawn(literal ? "global:sampled (literal softmax, surrogate)" : "global:sampled (surrogate)",
                  s.weighted([cand, params, literal](Tape&, Inputs x) {
                    const attn::GlobalAttentionParams gp = params(x);
                    const Tensor w = attn::view_weights(gp.view_logits);
                    const attn::ViewAttention u = attn::global_view_attention(x[0], x[1], gp);
                    const attn::SampleScores sc = attn::sample_scores(u.u_s, u.u_p, cand, w, literal);
                    const attn::GlobalSample smp = attn::sample(sc.m, cand, {}, /*surrogate=*/true);
                    const Tensor ua = attn::sampled_attribute_attention(x[2], gp.w_aq, gp.w_ak, *smp.support);
                    return attn::global_aggregate(u.u_s, u.u_p, ua, smp.gate, x[2], *smp.support, w).out;
                  }),
                  inputs);
  }
  const ad::SparsePattern* pa = &all;
  s.check_drawn("global:dense", s.weighted([pa, params](Tape&, Inputs x) {
    const attn::GlobalAttentionParams gp = params(x);
    const Tensor w = attn::view_weights(gp.view_logits);
    const attn::ViewAttention u = attn::global_view_attention(x[0], x[1], gp);
    const Tensor ua = attn::sampled_attribute_attention(x[2], gp.w_aq, gp.w_ak, *pa);
    return attn::global_aggregate(u.u_s, u.u_p, ua, std::nullopt, x[2], *pa, w).out;
  }),
                inputs);
}

void full_model(Suite& s, Ablation ablation, bool residual, std::uint64_t seed) {
  Graph g = generate_random_graph(12, 0.3, 5, seed);
  std::vector<int> labels(g.num_nodes());
  std::uniform_int_distribution<int> cls(0, 2);
  for (int& y : labels) y = cls(s.rng());
  Splits sp;
  for (NodeId i = 0; i < g.num_nodes(); ++i) sp.train.push_back(i);
  g = g.with_labels(labels).with_splits(sp);

  DeGTAConfig cfg;
  cfg.k = 8;
  cfg.hidden = 6;
  cfg.struct_dim = 4;
  cfg.pos_dim = 4;
  cfg.score_dim = 4;
  cfg.attr_score_dim = 5;
  cfg.layers = 2;
  cfg.ablation = ablation;
  cfg.residual = residual;
  cfg.seed = seed;
  cfg = cfg.resolved();
  const GraphContext ctx = make_context(g, cfg);
  std::vector<std::string> names;
  for (const auto& e : init_parameters(cfg, g.feature_dim(), 3).entries) names.push_back(e.name);
  auto draw = [&] {
    cfg.seed = s.rng()();
    std::vector<Matrix> inputs;
    // Biases and view logits start at zero; draw them too so that zero
    // encoding rows do not put activations exactly on a kink.
    for (auto& e : init_parameters(cfg, g.feature_dim(), 3).entries) {
      const bool zero =
          std::all_of(e.value.values().begin(), e.value.values().end(), [](double v) { return v == 0.0; });
      inputs.push_back(zero ? s.uniform(e.value.rows(), e.value.cols()) : std::move(e.value));
    }
    return inputs;
  };
  const std::vector<NodeId> rows = sp.train;
  const ScalarFn f = [&ctx, cfg, names, labels, rows](Tape& t, Inputs x) {
    BoundParams bp;
    for (std::size_t i = 0; i < names.size(); ++i) bp.set(names[i], x[i]);
    ForwardOptions fo;
    fo.surrogate = true;
    const ForwardResult fr = model_forward(t, bp, ctx, cfg, TaskKind::kNode, fo);
    return ad::cross_entropy(ad::gather_rows(fr.output, rows), labels);
  };
  std::string name = "model:" + to_string(ablation);
  if (residual) name += "+residual";
  s.check_drawn(name + " (2 layers, N=12)", f, draw);
}

}  // namespace

GradCheckSuiteReport run_gradcheck_suite(double eps, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  Suite s(eps, seed);
  const Graph small = generate_random_graph(6, 0.4, 2, seed + 1);
  const ad::SparsePattern small_nbhd = ad::SparsePattern::from_graph(small, true);
  primitives(s, small_nbhd);

  const Graph g = generate_random_graph(10, 0.3, 2, seed + 2);
  const ad::SparsePattern nbhd = ad::SparsePattern::from_graph(g, true);
  encoding_paths(s, g, nbhd);
  local_pipeline(s, nbhd);
  global_pipeline(s, g);

  full_model(s, Ablation::kFull, false, seed + 3);
  full_model(s, Ablation::kFull, true, seed + 4);
  full_model(s, Ablation::kCoupledAttention, false, seed + 5);
  full_model(s, Ablation::kSummedIntegration, false, seed + 6);
  full_model(s, Ablation::kDenseGlobal, false, seed + 7);
  full_model(s, Ablation::kNoGlobal, false, seed + 8);

  s.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s.report;
}

}  // namespace degta
