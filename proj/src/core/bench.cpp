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

#include "degta/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <random>

#include "degta/attention_global.hpp"
#include "degta/attention_local.hpp"
#include "degta/encodings.hpp"
#include "degta/error.hpp"
#include "degta/generators.hpp"

namespace degta {

namespace {

using Clock = std::chrono::steady_clock;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

struct Fixture {
  Graph graph;
  Matrix s, pe, h;
  Matrix w_str, w_pos, w_atr, q_s, q_p, q_a, logits;
  Matrix w_sq, w_sk, w_pq, w_pk, w_aq, w_ak;
  ad::SparsePattern neighborhoods;
  Matrix candidates;
};

Fixture make_fixture(std::size_t n, const BenchOptions& opts, std::mt19937_64& rng) {
  const auto k = static_cast<std::size_t>(opts.k);
  const auto d = static_cast<std::size_t>(opts.hidden);
  const std::size_t d1 = 16, d2 = 64;
  const double p = std::min(1.0, opts.avg_degree / static_cast<double>(n - 1));
  Fixture f;
  f.graph = generate_random_graph(n, p, d, opts.seed + n);
  f.s = random_matrix(n, k, rng);
  f.pe = random_matrix(n, k, rng);
  f.h = random_matrix(n, d, rng);
  f.w_str = random_matrix(k, d1, rng);
  f.w_pos = random_matrix(k, d1, rng);
  f.w_atr = random_matrix(d, d2, rng);
  f.q_s = random_matrix(2 * d1, 1, rng);
  f.q_p = random_matrix(2 * d1, 1, rng);
  f.q_a = random_matrix(2 * d2, 1, rng);
  f.logits = random_matrix(1, 3, rng);
  f.w_sq = random_matrix(k, d1, rng);
  f.w_sk = random_matrix(k, d1, rng);
  f.w_pq = random_matrix(k, d1, rng);
  f.w_pk = random_matrix(k, d1, rng);
  f.w_aq = random_matrix(d, d2, rng);
  f.w_ak = random_matrix(d, d2, rng);
  f.neighborhoods = ad::SparsePattern::from_graph(f.graph, true);
  f.candidates = attn::candidate_mask(f.graph);
  return f;
}

void encode_once(const Fixture& f, const BenchOptions& opts) {
  EncodingOptions eo;
  eo.k = opts.k;
  (void)encode(f.graph, eo);
}

void local_once(const Fixture& f) {
  ad::Tape t;
  const attn::LocalAttentionParams lp{t.constant(f.w_str), t.constant(f.w_pos), t.constant(f.w_atr), t.constant(f.q_s),
                                      t.constant(f.q_p),   t.constant(f.q_a),   t.constant(f.logits)};
  const ad::Tensor hs = t.constant(f.h);
  const attn::LocalScores sc = attn::local_scores(t.constant(f.s), t.constant(f.pe), hs, f.neighborhoods, lp);
  (void)attn::local_aggregate(attn::local_integrate(sc, lp.view_logits), hs, f.neighborhoods);
}

void global_once(const Fixture& f, const BenchOptions& opts) {
  ad::Tape t;
  const attn::GlobalAttentionParams gp{t.constant(f.w_sq), t.constant(f.w_sk), t.constant(f.w_pq),  t.constant(f.w_pk),
                                       t.constant(f.w_aq), t.constant(f.w_ak), t.constant(f.logits)};
  attn::SamplingStrategy strategy;
  strategy.top_k = opts.k;
  const ad::Tensor hs = t.constant(f.h);
  const ad::Tensor w = attn::view_weights(gp.view_logits);
  const attn::ViewAttention u = attn::global_view_attention(t.constant(f.s), t.constant(f.pe), gp);
  const attn::SampleScores sc = attn::sample_scores(u.u_s, u.u_p, f.candidates, w);
  const attn::GlobalSample smp = attn::sample(sc.m, f.candidates, strategy);
  const ad::Tensor ua = attn::sampled_attribute_attention(hs, gp.w_aq, gp.w_ak, *smp.support);
  (void)attn::global_aggregate(u.u_s, u.u_p, ua, smp.gate, hs, *smp.support, w);
}

// The call count per batch is fixed by a warm-up lasting at least min_batch_seconds.
struct Probe {
  std::function<void()> fn;
  int calls = 1;
  double best = std::numeric_limits<double>::infinity();

  void calibrate(double min_seconds) {
    while (true) {
      const auto t0 = Clock::now();
      for (int i = 0; i < calls; ++i) fn();
      const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
      if (dt >= min_seconds || calls >= (1 << 20)) break;
      calls *= 2;
    }
  }

  void measure() {
    const auto t0 = Clock::now();
    for (int i = 0; i < calls; ++i) fn();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count() / calls);
  }
};

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  require(opts.min_n >= 8 && opts.max_n >= opts.min_n, ErrorKind::kUsage, "bench needs 8 <= min-n <= max-n");
  require(opts.batches >= 1, ErrorKind::kUsage, "bench needs at least one batch");
  require(opts.k >= 1 && opts.hidden >= 1, ErrorKind::kUsage, "bench needs positive k and hidden width");
  std::mt19937_64 rng(opts.seed);
  std::vector<Fixture> fixtures;
  for (std::size_t n = opts.min_n; n <= opts.max_n; n *= 2) fixtures.push_back(make_fixture(n, opts, rng));

  std::vector<Probe> probes;
  for (const Fixture& f : fixtures) {
    probes.push_back({[&f, &opts] { encode_once(f, opts); }});
    probes.push_back({[&f] { local_once(f); }});
    probes.push_back({[&f, &opts] { global_once(f, opts); }});
  }
  for (Probe& p : probes) p.calibrate(opts.min_batch_seconds);
  // Each round visits every size once.
  for (int round = 0; round < opts.batches; ++round)
    for (Probe& p : probes) p.measure();

  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    BenchRow row;
    row.n = fixtures[i].graph.num_nodes();
    row.edges = fixtures[i].graph.num_edges();
    row.encode = probes[3 * i].best;
    row.local = probes[3 * i + 1].best;
    row.global = probes[3 * i + 2].best;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace degta
