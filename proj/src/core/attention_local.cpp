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

#include "degta/attention_local.hpp"

#include "degta/error.hpp"

namespace degta::attn {

ad::Tensor pair_score(const ad::Tensor& x, const ad::Tensor& w, const ad::Tensor& q, const ad::SparsePattern& pattern) {
  require(q.rows() == 2 * w.cols() && q.cols() == 1, ErrorKind::kValidation, [&] {
    return "pair_score: q has shape " + q.value().shape_string() + ", expected " + std::to_string(2 * w.cols()) + "x1";
  });
  const ad::Tensor proj = ad::matmul(x, w);
  const ad::Tensor cat = ad::concat_cols(ad::gather_rows(proj, pattern.rows), ad::gather_rows(proj, pattern.cols));
  return ad::matmul(ad::leaky_relu(cat, kLeakySlope), q);
}

LocalScores local_scores(const ad::Tensor& s_enc, const ad::Tensor& p_enc, const ad::Tensor& h_enc,
                         const ad::SparsePattern& neighborhoods, const LocalAttentionParams& params) {
  return {pair_score(s_enc, params.w_str, params.q_s, neighborhoods),
          pair_score(p_enc, params.w_pos, params.q_p, neighborhoods),
          pair_score(h_enc, params.w_atr, params.q_a, neighborhoods)};
}

ad::Tensor view_weights(const ad::Tensor& view_logits) {
  require(view_logits.rows() == 1 && view_logits.cols() == 3, ErrorKind::kValidation,
          [&] { return "view logits must be 1x3, got " + view_logits.value().shape_string(); });
  return ad::row_softmax(view_logits);
}

ad::Tensor local_integrate(const LocalScores& scores, const ad::Tensor& view_logits) {
  const ad::Tensor w = view_weights(view_logits);
  const ad::Tensor z =
      ad::add(ad::mul_scalar(scores.p, ad::slice_cols(w, 0, 1)), ad::mul_scalar(scores.s, ad::slice_cols(w, 1, 2)));
  return ad::add(z, ad::mul_scalar(scores.a, ad::slice_cols(w, 2, 3)));
}

LocalAggregation local_aggregate(const ad::Tensor& z, const ad::Tensor& h, const ad::SparsePattern& neighborhoods) {
  for (std::size_t r = 0; r < neighborhoods.num_rows; ++r)
    require(neighborhoods.row_size(r) > 0, ErrorKind::kValidation,
            [&] { return "local_aggregate: node " + std::to_string(r) + " has an empty neighborhood"; });
  LocalAggregation agg;
  agg.weights = ad::segment_softmax(z, neighborhoods);
  agg.out = ad::segment_aggregate(agg.weights, h, neighborhoods);
  return agg;
}

}  // namespace degta::attn
