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

#include "degta/encodings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "degta/eigen_sym.hpp"
#include "degta/error.hpp"

namespace degta {

namespace {

void require_k(int k, int min_k, const char* what) {
  require(k >= min_k, ErrorKind::kUsage,
          [&] { return std::string(what) + ": K must be >= " + std::to_string(min_k) + ", got " + std::to_string(k); });
}

// One step of the lazy walk on row vectors: next = v * (D+I)^-1 (A+I).
// Neighbor terms are added in ascending order of value so that the result
// does not depend on node numbering, which keeps the walk encodings exactly
// permutation equivariant.
void walk_step(const Graph& g, const std::vector<double>& v, std::vector<double>& scaled, std::vector<double>& next,
               std::vector<double>& terms) {
  const std::size_t n = g.num_nodes();
  for (NodeId u = 0; u < n; ++u) scaled[u] = v[u] / static_cast<double>(g.degree(u) + 1);
  for (NodeId j = 0; j < n; ++j) {
    terms.clear();
    for (NodeId u : g.neighbors(j)) terms.push_back(scaled[u]);
    std::sort(terms.begin(), terms.end());
    double s = scaled[j];
    for (double t : terms) s += t;
    next[j] = s;
  }
}

/// Order-independent sum of squares.
double sorted_square_sum(const std::vector<double>& row, std::vector<double>& buf) {
  buf.clear();
  for (double x : row)
    if (x != 0.0) buf.push_back(x * x);
  std::sort(buf.begin(), buf.end());
  double sq = 0.0;
  for (double x : buf) sq += x;
  return sq;
}

// Calls visit(step, row) with row = (Â^step)_{source,:} for step = 0..k-1.
template <typename Visit>
void walk_rows(const Graph& g, NodeId source, int k, Visit&& visit) {
  const std::size_t n = g.num_nodes();
  std::vector<double> v(n, 0.0), scaled(n), next(n), terms;
  v[source] = 1.0;
  for (int step = 0; step < k; ++step) {
    visit(step, static_cast<const std::vector<double>&>(v));
    if (step + 1 < k) {
      walk_step(g, v, scaled, next, terms);
      v.swap(next);
    }
  }
}

}  // namespace

std::string to_string(PeKind kind) {
  switch (kind) {
    case PeKind::kJaccard:
      return "jaccard";
    case PeKind::kLapPe:
      return "lappe";
    case PeKind::kRwpe:
      return "rwpe";
  }
  return "?";
}

std::string to_string(SeKind kind) {
  switch (kind) {
    case SeKind::kRwse:
      return "rwse";
    case SeKind::kDse:
      return "dse";
    case SeKind::kTcse:
      return "tcse";
  }
  return "?";
}

PeKind parse_pe_kind(std::string_view name) {
  if (name == "jaccard") return PeKind::kJaccard;
  if (name == "lappe") return PeKind::kLapPe;
  if (name == "rwpe") return PeKind::kRwpe;
  fail(ErrorKind::kUsage, "unknown positional encoding '" + std::string(name) + "' (jaccard|lappe|rwpe)");
}

SeKind parse_se_kind(std::string_view name) {
  if (name == "rwse") return SeKind::kRwse;
  if (name == "dse") return SeKind::kDse;
  if (name == "tcse") return SeKind::kTcse;
  fail(ErrorKind::kUsage, "unknown structural encoding '" + std::string(name) + "' (rwse|dse|tcse)");
}

Matrix rwse(const Graph& g, int k) {
  require_k(k, 1, "rwse");
  Matrix s(g.num_nodes(), static_cast<std::size_t>(k));
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    walk_rows(g, i, k, [&](int step, const std::vector<double>& row) { s(i, step) = row[i]; });
  return s;
}

Matrix rwpe(const Graph& g, int k) {
  require_k(k, 1, "rwpe");
  Matrix p(g.num_nodes(), static_cast<std::size_t>(k));
  std::vector<double> buf;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    walk_rows(g, i, k,
              [&](int step, const std::vector<double>& row) { p(i, step) = std::sqrt(sorted_square_sum(row, buf)); });
  return p;
}

Matrix dse(const Graph& g, int k) {
  require_k(k, 2, "dse");
  const std::size_t n = g.num_nodes();
  const double max_deg = static_cast<double>(g.max_degree());
  Matrix s(n, static_cast<std::size_t>(k));
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t deg = g.degree(i);
    s(i, 0) = max_deg > 0.0 ? static_cast<double>(deg) / max_deg : 0.0;
    const std::size_t bin = std::bit_width(deg + 1) - 1;  // floor(log2(1 + deg))
    s(i, 1 + std::min<std::size_t>(bin, static_cast<std::size_t>(k - 2))) = 1.0;
  }
  return s;
}

Matrix tcse(const Graph& g, int k) {
  require_k(k, 2, "tcse");
  const std::size_t n = g.num_nodes();
  Matrix s(n, static_cast<std::size_t>(k));
  std::vector<std::size_t> common(n, 0);
  std::vector<NodeId> touched;
  for (NodeId i = 0; i < n; ++i) {
    auto ni = g.neighbors(i);
    // Triangles: neighbor pairs a < b that are adjacent.
    std::size_t triangles = 0;
    for (NodeId a : ni) {
      auto na = g.neighbors(a);
      auto it_i = std::upper_bound(ni.begin(), ni.end(), a);
      auto it_a = std::upper_bound(na.begin(), na.end(), a);
      while (it_i != ni.end() && it_a != na.end()) {
        if (*it_i < *it_a)
          ++it_i;
        else if (*it_a < *it_i)
          ++it_a;
        else {
          ++triangles;
          ++it_i;
          ++it_a;
        }
      }
    }
    // 4-cycles i-a-x-b-i: choose 2 of the common neighbors of i and each x.
    touched.clear();
    for (NodeId a : ni)
      for (NodeId x : g.neighbors(a)) {
        if (x == i) continue;
        if (common[x]++ == 0) touched.push_back(x);
      }
    std::size_t quads = 0;
    for (NodeId x : touched) {
      quads += common[x] * (common[x] - 1) / 2;
      common[x] = 0;
    }
    s(i, 0) = static_cast<double>(triangles) / static_cast<double>(n);
    s(i, 1) = static_cast<double>(quads) / static_cast<double>(n);
  }
  return s;
}

Matrix lap_pe(const Graph& g, int k) {
  require_k(k, 1, "lap_pe");
  const std::size_t n = g.num_nodes();
  require(static_cast<std::size_t>(k) + 1 <= n, ErrorKind::kValidation, [&] {
    return "lap_pe: K=" + std::to_string(k) + " needs at least K+1 nodes, graph has " + std::to_string(n);
  });
  const Matrix lap = derive_matrices(g).sym_laplacian;
  const SymmetricEigen eig = symmetric_eigen(lap);

  Matrix p(n, static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const std::size_t col = static_cast<std::size_t>(c) + 1;
    double max_mag = 0.0;
    for (std::size_t r = 0; r < n; ++r) max_mag = std::max(max_mag, std::abs(eig.vectors(r, col)));
    // First index whose magnitude ties the maximum decides the sign.
    std::size_t lead = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (std::abs(eig.vectors(r, col)) >= max_mag * (1.0 - 1e-12)) {
        lead = r;
        break;
      }
    const double sign = eig.vectors(lead, col) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) p(r, static_cast<std::size_t>(c)) = sign * eig.vectors(r, col);

    const double lambda = eig.values[col];
    double res = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double lv = 0.0;
      for (std::size_t q = 0; q < n; ++q) lv += lap(r, q) * p(q, static_cast<std::size_t>(c));
      const double d = lv - lambda * p(r, static_cast<std::size_t>(c));
      res += d * d;
    }
    require(std::sqrt(res) <= 1e-8, ErrorKind::kNumeric,
            [&] { return "lap_pe: eigenpair residual " + std::to_string(std::sqrt(res)) + " exceeds 1e-8"; });
  }
  return p;
}

Matrix jaccard_pairwise(const Graph& g, const JaccardConfig& cfg) {
  require_k(cfg.cap, 1, "jaccard_pe");
  require(cfg.bandwidth > 0.0, ErrorKind::kUsage, "jaccard_pe: bandwidth must be positive");
  const std::size_t n = g.num_nodes();
  const double two_h2 = 2.0 * cfg.bandwidth * cfg.bandwidth;
  Matrix out(n, n);
  std::vector<bool> assigned(n);
  for (NodeId i = 0; i < n; ++i) {
    std::fill(assigned.begin(), assigned.end(), false);
    walk_rows(g, i, cfg.cap, [&](int step, const std::vector<double>& row) {
      const double kk = static_cast<double>(step);
      for (NodeId j = 0; j < n; ++j) {
        if (row[j] > 0.0 && !assigned[j]) {
          out(i, j) = std::exp(-(kk * kk) / two_h2);
          assigned[j] = true;
        }
      }
    });
  }
  return out;
}

Matrix jaccard_vector(const Graph& g, const JaccardConfig& cfg) {
  require_k(cfg.cap, 1, "jaccard_pe");
  require(cfg.bandwidth > 0.0, ErrorKind::kUsage, "jaccard_pe: bandwidth must be positive");
  const std::size_t n = g.num_nodes();
  const int k = cfg.cap;
  const double two_h2 = 2.0 * cfg.bandwidth * cfg.bandwidth;
  Matrix p(n, static_cast<std::size_t>(k));
  std::vector<std::size_t> hist(static_cast<std::size_t>(k) + 1);
  for (NodeId i = 0; i < n; ++i) {
    const auto dist = bfs_distances(g, i, k + 1);
    std::fill(hist.begin(), hist.end(), 0);
    for (int d : dist)
      if (d != kUnreached) ++hist[static_cast<std::size_t>(d)];
    std::size_t within = 0;  // j != i with dist < K
    for (int d = 1; d < k; ++d) within += hist[static_cast<std::size_t>(d)];
    const double denom = static_cast<double>(std::max<std::size_t>(1, within));
    for (int c = 0; c < k; ++c) {
      const double dd = static_cast<double>(c + 1);
      p(i, static_cast<std::size_t>(c)) =
          std::exp(-(dd * dd) / two_h2) * static_cast<double>(hist[static_cast<std::size_t>(c) + 1]) / denom;
    }
  }
  return p;
}

JaccardEncoding jaccard_pe(const Graph& g, const JaccardConfig& cfg) {
  return {jaccard_pairwise(g, cfg), jaccard_vector(g, cfg)};
}

EncodingSet encode(const Graph& g, const EncodingOptions& opts) {
  EncodingSet set;
  set.k = opts.k;
  set.pe_kind = opts.pe;
  set.se_kind = opts.se;
  set.bandwidth = opts.bandwidth;
  const JaccardConfig jc{opts.bandwidth, opts.k};
  switch (opts.pe) {
    case PeKind::kJaccard:
      set.pe = jaccard_vector(g, jc);
      break;
    case PeKind::kLapPe:
      set.pe = lap_pe(g, opts.k);
      break;
    case PeKind::kRwpe:
      set.pe = rwpe(g, opts.k);
      break;
  }
  switch (opts.se) {
    case SeKind::kRwse:
      set.se = rwse(g, opts.k);
      break;
    case SeKind::kDse:
      set.se = dse(g, opts.k);
      break;
    case SeKind::kTcse:
      set.se = tcse(g, opts.k);
      break;
  }
  if (opts.keep_pairwise) set.pairwise_jaccard = jaccard_pairwise(g, jc);
  return set;
}

}  // namespace degta
