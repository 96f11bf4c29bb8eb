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

// Global attention: dense positional/structural attention, hard sampling of
// long-range non-neighbors, and attribute attention restricted to the sampled
// pairs.
//
// The sampled set K_i of each row is stored as a SparsePattern (the
// "support"). Aggregation over the support uses
//
//   z_hat = segment_softmax(z + log(gate)),   gate = mask at support entries.
//
// In the normal forward pass the mask is exactly 1 on the support so the gate
// term is exactly zero, while the straight-through mask still receives the
// upstream gradient of z. With the surrogate flag the mask is the soft score
// itself, which makes the whole pipeline smooth for finite-difference checks.

#ifndef DEGTA_ATTENTION_GLOBAL_HPP
#define DEGTA_ATTENTION_GLOBAL_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "degta/autograd.hpp"
#include "degta/graph.hpp"

namespace degta::attn {

/// Query/key projections, input-major (applied as X * W).
struct GlobalAttentionParams {
  ad::Tensor w_sq, w_sk;   ///< d_s x d'
  ad::Tensor w_pq, w_pk;   ///< d_p x d'
  ad::Tensor w_aq, w_ak;   ///< d x d''
  ad::Tensor view_logits;  ///< 1 x 3: (positional, structural, attribute)
};

enum class SamplingKind { kTopK, kThreshold };

struct SamplingStrategy {
  SamplingKind kind = SamplingKind::kTopK;
  int top_k = 8;
  /// Fixed threshold in (0, 1); 0 selects the per-row default 2 / |C_i|.
  double tau = 0.0;
  friend bool operator==(const SamplingStrategy&, const SamplingStrategy&) = default;
};

std::string to_string(SamplingKind kind);
SamplingKind parse_sampling_kind(std::string_view name);
void validate(const SamplingStrategy& strategy);

/// row_softmax((X Wq)(X Wk)^T / sqrt(width of X)).
ad::Tensor dense_attention(const ad::Tensor& x, const ad::Tensor& wq, const ad::Tensor& wk);

struct ViewAttention {
  ad::Tensor u_s;
  ad::Tensor u_p;
};

ViewAttention global_view_attention(const ad::Tensor& s_enc, const ad::Tensor& p_enc,
                                    const GlobalAttentionParams& params);

/// 1 - A - I: one on non-neighbors, zero on edges and the diagonal.
Matrix candidate_mask(const Graph& g);

/// Same but only zero on the diagonal (dense global baseline).
Matrix off_diagonal_mask(std::size_t n);

struct SampleScores {
  ad::Tensor m;                  ///< N x N
  std::vector<bool> empty_rows;  ///< rows without candidates
};

/// Masked row softmax of (alpha U_s + beta U_p) over candidates. With
/// `literal_softmax` the softmax runs over the whole row of the masked
/// product instead, so zeroed entries still take part in the normalizer.
SampleScores sample_scores(const ad::Tensor& u_s, const ad::Tensor& u_p, const Matrix& candidates,
                           const ad::Tensor& view_weights, bool literal_softmax = false);

struct GlobalSample {
  ad::Tensor mask;                             ///< N x N, binary unless surrogate
  const ad::SparsePattern* support = nullptr;  ///< sampled pairs, owned by the tape
  ad::Tensor gate;                             ///< mask values on the support
};

/// Hard per-row selection among candidates with a straight-through mask.
/// Top-k ties go to the lower column index. With `surrogate` the mask is
/// m * candidates and the support is every candidate with m > 0.
GlobalSample sample(const ad::Tensor& m, const Matrix& candidates, const SamplingStrategy& strategy,
                    bool surrogate = false);

/// Hard indicator chosen by `sample`, without recording anything.
Matrix select_hard(const Matrix& m, const Matrix& candidates, const SamplingStrategy& strategy);

/// softmax over each K_i of (H Wq)_i . (H Wk)_j / sqrt(d); nnz x 1.
ad::Tensor sampled_attribute_attention(const ad::Tensor& h, const ad::Tensor& wq, const ad::Tensor& wk,
                                       const ad::SparsePattern& support);

struct GlobalAggregation {
  ad::Tensor us;       ///< U_s on the support, nnz x 1
  ad::Tensor up;       ///< U_p on the support
  ad::Tensor z;        ///< combined logits before normalization
  ad::Tensor weights;  ///< normalized over each K_i
  ad::Tensor out;      ///< N x d, zero rows where K_i is empty
};

/// z_ij = alpha U_s + beta U_p + gamma U_a on the support, normalized per row
/// and used to average H. `gate`, when present, enters as log(gate).
GlobalAggregation global_aggregate(const ad::Tensor& u_s, const ad::Tensor& u_p, const ad::Tensor& u_a,
                                   const std::optional<ad::Tensor>& gate, const ad::Tensor& h,
                                   const ad::SparsePattern& support, const ad::Tensor& view_weights);

}  // namespace degta::attn

#endif  // DEGTA_ATTENTION_GLOBAL_HPP
