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

// Initial positional (PE) and structural (SE) encodings, each N x K.

#ifndef DEGTA_ENCODINGS_HPP
#define DEGTA_ENCODINGS_HPP

#include <optional>
#include <string>
#include <string_view>

#include "degta/graph.hpp"

namespace degta {

enum class PeKind { kJaccard, kLapPe, kRwpe };
enum class SeKind { kRwse, kDse, kTcse };

std::string to_string(PeKind kind);
std::string to_string(SeKind kind);
PeKind parse_pe_kind(std::string_view name);
SeKind parse_se_kind(std::string_view name);

struct JaccardConfig {
  double bandwidth = 1.0;  ///< h in exp(-dist^2 / (2 h^2))
  int cap = 8;             ///< pairs at distance >= cap get 0
};

struct EncodingOptions {
  PeKind pe = PeKind::kJaccard;
  SeKind se = SeKind::kRwse;
  int k = 8;
  double bandwidth = 1.0;
  bool keep_pairwise = false;  ///< also store the N x N Jaccard matrix
};

struct EncodingSet {
  Matrix pe;                               ///< N x K
  Matrix se;                               ///< N x K
  std::optional<Matrix> pairwise_jaccard;  ///< N x N, symmetric, unit diagonal
  int k = 0;
  PeKind pe_kind = PeKind::kJaccard;
  SeKind se_kind = SeKind::kRwse;
  double bandwidth = 1.0;
};

/// Self-return probabilities of the lazy random walk: S[i,k] = (Â^k)_ii.
Matrix rwse(const Graph& g, int k);

/// Normalized degree in column 0, one-hot floor(log2(1+deg)) bin in
/// columns 1..K-1 (overflow clamped to the last bin).
Matrix dse(const Graph& g, int k);

/// Per-node triangle and 4-cycle counts divided by N in columns 0 and 1.
Matrix tcse(const Graph& g, int k);

/// Eigenvectors of the symmetric normalized Laplacian for the 2nd..(K+1)th
/// smallest eigenvalues, each sign-fixed so its largest-magnitude entry is
/// positive. Requires K <= N-1.
Matrix lap_pe(const Graph& g, int k);

/// P[i,k] = || (Â^k)_{i,:} ||_2.
Matrix rwpe(const Graph& g, int k);

/// Pairwise Jaccard encoding by walk-matrix positivity: entry (i,j) is
/// exp(-k^2/(2h^2)) for the first power k < cap at which (Â^k)_ij > 0, else 0.
Matrix jaccard_pairwise(const Graph& g, const JaccardConfig& cfg);

/// Per-node Jaccard vector: Gaussian-decayed histogram of hop distances
/// 1..cap, normalized by the number of other nodes within distance < cap.
Matrix jaccard_vector(const Graph& g, const JaccardConfig& cfg);

struct JaccardEncoding {
  Matrix pairwise;
  Matrix per_node;
};
JaccardEncoding jaccard_pe(const Graph& g, const JaccardConfig& cfg);

EncodingSet encode(const Graph& g, const EncodingOptions& opts);

}  // namespace degta

#endif  // DEGTA_ENCODINGS_HPP
