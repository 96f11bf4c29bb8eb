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

// Decoupled local triple attention. Every node attends over its neighborhood
// plus itself with three independent scores (structural s, positional p,
// attribute a), mixed by softmaxed view weights and normalized per row.

#ifndef DEGTA_ATTENTION_LOCAL_HPP
#define DEGTA_ATTENTION_LOCAL_HPP

#include "degta/autograd.hpp"

namespace degta::attn {

inline constexpr double kLeakySlope = 0.2;

/// Learnable weights of one local attention block, bound to a tape.
/// Projections are stored input-major (applied as X * W).
struct LocalAttentionParams {
  ad::Tensor w_str;        ///< d_s x d'
  ad::Tensor w_pos;        ///< d_p x d'
  ad::Tensor w_atr;        ///< d x d''
  ad::Tensor q_s;          ///< 2d' x 1
  ad::Tensor q_p;          ///< 2d' x 1
  ad::Tensor q_a;          ///< 2d'' x 1
  ad::Tensor view_logits;  ///< 1 x 3: (positional, structural, attribute)
};

/// Per-entry scores over a neighborhood pattern; each is nnz x 1.
struct LocalScores {
  ad::Tensor s;
  ad::Tensor p;
  ad::Tensor a;
};

/// q^T leaky([x_i W || x_j W]) for every entry (i, j) of the pattern.
ad::Tensor pair_score(const ad::Tensor& x, const ad::Tensor& w, const ad::Tensor& q, const ad::SparsePattern& pattern);

LocalScores local_scores(const ad::Tensor& s_enc, const ad::Tensor& p_enc, const ad::Tensor& h_enc,
                         const ad::SparsePattern& neighborhoods, const LocalAttentionParams& params);

/// softmax over the three view logits, 1 x 3.
ad::Tensor view_weights(const ad::Tensor& view_logits);

/// z = alpha p + beta s + gamma a with (alpha, beta, gamma) = softmax(view_logits).
ad::Tensor local_integrate(const LocalScores& scores, const ad::Tensor& view_logits);

struct LocalAggregation {
  ad::Tensor weights;  ///< normalized scores per entry, nnz x 1
  ad::Tensor out;      ///< N x d
};

/// Row-wise softmax of z over each neighborhood, then weighted sum of H rows.
LocalAggregation local_aggregate(const ad::Tensor& z, const ad::Tensor& h, const ad::SparsePattern& neighborhoods);

}  // namespace degta::attn

#endif  // DEGTA_ATTENTION_LOCAL_HPP
