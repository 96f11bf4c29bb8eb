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

#include "degta/attention_global.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "degta/error.hpp"

namespace degta::attn {

std::string to_string(SamplingKind kind) { return kind == SamplingKind::kTopK ? "topk" : "threshold"; }

SamplingKind parse_sampling_kind(std::string_view name) {
  if (name == "topk") return SamplingKind::kTopK;
  if (name == "threshold") return SamplingKind::kThreshold;
  fail(ErrorKind::kUsage, "unknown sampling strategy '" + std::string(name) + "' (expected topk or threshold)");
}

void validate(const SamplingStrategy& strategy) {
  if (strategy.kind == SamplingKind::kTopK)
    require(strategy.top_k >= 1, ErrorKind::kValidation,
            [&] { return "top-k sampling needs k >= 1, got " + std::to_string(strategy.top_k); });
  else
    require(strategy.tau >= 0.0 && strategy.tau < 1.0, ErrorKind::kValidation,
            [&] { return "threshold tau must lie in [0, 1), got " + std::to_string(strategy.tau); });
}

ad::Tensor dense_attention(const ad::Tensor& x, const ad::Tensor& wq, const ad::Tensor& wk) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  const ad::Tensor q = ad::scale(ad::matmul(x, wq), inv);
  const ad::Tensor k = ad::matmul(x, wk);
  return ad::row_softmax(ad::matmul_nt(q, k));
}

ViewAttention global_view_attention(const ad::Tensor& s_enc, const ad::Tensor& p_enc,
                                    const GlobalAttentionParams& params) {
  return {dense_attention(s_enc, params.w_sq, params.w_sk), dense_attention(p_enc, params.w_pq, params.w_pk)};
}

Matrix candidate_mask(const Graph& g) {
  const std::size_t n = g.num_nodes();
  Matrix c(n, n, 1.0);
  for (std::size_t u = 0; u < n; ++u) {
    c(u, u) = 0.0;
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) c(u, v) = 0.0;
  }
  return c;
}

Matrix off_diagonal_mask(std::size_t n) {
  Matrix c(n, n, 1.0);
  for (std::size_t u = 0; u < n; ++u) c(u, u) = 0.0;
  return c;
}

SampleScores sample_scores(const ad::Tensor& u_s, const ad::Tensor& u_p, const Matrix& candidates,
                           const ad::Tensor& view_weights, bool literal_softmax) {
  const ad::Tensor logits = ad::add(ad::mul_scalar(u_p, ad::slice_cols(view_weights, 0, 1)),
                                    ad::mul_scalar(u_s, ad::slice_cols(view_weights, 1, 2)));
  SampleScores out;
  if (literal_softmax) {
    out.m = ad::row_softmax(ad::elementwise_mul(logits, logits.tape().constant(candidates)));
    out.empty_rows.assign(candidates.rows(), false);
    for (std::size_t r = 0; r < candidates.rows(); ++r) {
      const auto row = candidates.row(r);
      out.empty_rows[r] = std::none_of(row.begin(), row.end(), [](double v) { return v != 0.0; });
    }
  } else {
    out.m = ad::masked_row_softmax(logits, candidates, /*allow_empty=*/true, &out.empty_rows);
  }
  return out;
}

Matrix select_hard(const Matrix& m, const Matrix& candidates, const SamplingStrategy& strategy) {
  require(m.same_shape(candidates), ErrorKind::kValidation,
          [&] { return "sample: scores " + m.shape_string() + " vs candidates " + candidates.shape_string(); });
  validate(strategy);
  Matrix hard(m.rows(), m.cols());
  std::vector<std::size_t> cand;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    cand.clear();
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (candidates(r, c) != 0.0) cand.push_back(c);
    if (cand.empty()) continue;
    if (strategy.kind == SamplingKind::kTopK) {
      const std::size_t k = std::min(cand.size(), static_cast<std::size_t>(strategy.top_k));
      auto better = [&](std::size_t a, std::size_t b) { return m(r, a) > m(r, b) || (m(r, a) == m(r, b) && a < b); };
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), better);
      for (std::size_t i = 0; i < k; ++i) hard(r, cand[i]) = 1.0;
    } else {
      const double tau = strategy.tau > 0.0 ? strategy.tau : 2.0 / static_cast<double>(cand.size());
      for (std::size_t c : cand)
        if (m(r, c) > tau) hard(r, c) = 1.0;
    }
  }
  return hard;
}

GlobalSample sample(const ad::Tensor& m, const Matrix& candidates, const SamplingStrategy& strategy, bool surrogate) {
  ad::Tape& tape = m.tape();
  GlobalSample out;
  if (surrogate) {
    require(m.value().same_shape(candidates), ErrorKind::kValidation, [&] {
      return "sample: scores " + m.value().shape_string() + " vs candidates " + candidates.shape_string();
    });
    out.mask = ad::elementwise_mul(m, tape.constant(candidates));
  } else {
    out.mask = ad::straight_through(m, select_hard(m.value(), candidates, strategy));
  }
  out.support = &tape.keep(ad::SparsePattern::from_nonzeros(out.mask.value()));
  out.gate = ad::gather_entries(out.mask, *out.support);
  return out;
}

ad::Tensor sampled_attribute_attention(const ad::Tensor& h, const ad::Tensor& wq, const ad::Tensor& wk,
                                       const ad::SparsePattern& support) {
  const ad::Tensor logits = ad::pair_dot(ad::matmul(h, wq), ad::matmul(h, wk), support);
  const double inv = 1.0 / std::sqrt(static_cast<double>(h.cols()));
  return ad::segment_softmax(ad::scale(logits, inv), support);
}

GlobalAggregation global_aggregate(const ad::Tensor& u_s, const ad::Tensor& u_p, const ad::Tensor& u_a,
                                   const std::optional<ad::Tensor>& gate, const ad::Tensor& h,
                                   const ad::SparsePattern& support, const ad::Tensor& view_weights) {
  GlobalAggregation agg;
  agg.us = ad::gather_entries(u_s, support);
  agg.up = ad::gather_entries(u_p, support);
  ad::Tensor z = ad::add(ad::mul_scalar(agg.up, ad::slice_cols(view_weights, 0, 1)),
                         ad::mul_scalar(agg.us, ad::slice_cols(view_weights, 1, 2)));
  z = ad::add(z, ad::mul_scalar(u_a, ad::slice_cols(view_weights, 2, 3)));
  agg.z = gate ? ad::add(z, ad::log(*gate)) : z;
  agg.weights = ad::segment_softmax(agg.z, support);
  agg.out = ad::segment_aggregate(agg.weights, h, support);
  return agg;
}

}  // namespace degta::attn
