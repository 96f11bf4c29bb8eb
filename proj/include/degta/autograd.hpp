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

// Minimal reverse-mode differentiation over dense matrices.
//
// A Tape records every operation in execution order. Tensor is a cheap handle
// (tape pointer + node id); values live on the tape. backward() walks the
// recording in reverse exactly once and accumulates gradients additively into
// parents that require them.

#ifndef DEGTA_AUTOGRAD_HPP
#define DEGTA_AUTOGRAD_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "degta/graph.hpp"
#include "degta/matrix.hpp"

namespace degta::ad {

class Tape;

/// CSR sparsity pattern over an R x C index space (e.g. neighborhoods or
/// sampled pairs). Entry e lies in row rows[e] and column cols[e].
struct SparsePattern {
  std::size_t num_rows = 0;
  std::size_t num_cols = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodeId> rows;
  std::vector<NodeId> cols;

  std::size_t nnz() const noexcept { return cols.size(); }
  std::size_t row_size(std::size_t r) const { return offsets[r + 1] - offsets[r]; }

  /// Pattern of nonzero entries of a dense matrix.
  static SparsePattern from_nonzeros(const Matrix& m);
  /// Neighborhoods of g, optionally with i in its own row.
  static SparsePattern from_graph(const Graph& g, bool include_self);
};

class Tensor {
 public:
  Tensor() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const noexcept { return *tape_; }
  std::size_t id() const noexcept { return id_; }

  const Matrix& value() const;
  /// Gradient after Tape::backward(); an all-zero matrix if nothing flowed here.
  Matrix grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Matrix value);
  Tensor variable(Matrix value);

  /// Records an op result. The backward closure runs only when the result
  /// requires grad, i.e. when at least one parent does.
  Tensor record(Matrix value, std::span<const Tensor> parents, Backward backward);

  /// Seeds d(out)/d(out) = 1 for every entry of out and back-propagates.
  void backward(const Tensor& out);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Upstream gradient of a node; empty if none has been accumulated.
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  /// Accumulator for a parent's gradient, zero-initialized on first use.
  Matrix& grad_accumulator(std::size_t id);

  /// Stores a pattern for the lifetime of the tape. Sparse ops keep a
  /// pointer to their pattern, so patterns built during a forward pass
  /// should be parked here.
  const SparsePattern& keep(SparsePattern pattern);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() {
    nodes_.clear();
    patterns_.clear();
    kink_distance_ = std::numeric_limits<double>::infinity();
  }

  /// Non-smooth ops (leaky_relu, l1_loss) report how close their inputs came
  /// to a kink. Finite-difference checks use this to avoid kink crossings.
  void note_kink_distance(double d) { kink_distance_ = std::min(kink_distance_, d); }
  double kink_distance() const noexcept { return kink_distance_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::vector<std::unique_ptr<SparsePattern>> patterns_;
  double kink_distance_ = std::numeric_limits<double>::infinity();
};

// Dense primitives.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T without materializing the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// a (R x C) + row (1 x C) broadcast over rows.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double c);
/// a times a 1 x 1 tensor.
Tensor mul_scalar(const Tensor& a, const Tensor& s);
Tensor elementwise_mul(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor row_softmax(const Tensor& a);
/// Softmax of each row restricted to entries where mask != 0; masked entries
/// are exactly 0. A row without unmasked entries becomes all-zero and is
/// flagged in empty_rows when allow_empty is set, otherwise it is an error.
Tensor masked_row_softmax(const Tensor& a, const Matrix& mask, bool allow_empty = false,
                          std::vector<bool>* empty_rows = nullptr);
Tensor sum(const Tensor& a);
/// Column-wise mean over rows: R x C -> 1 x C.
Tensor mean_rows(const Tensor& a);
Tensor gather_rows(const Tensor& a, std::span<const NodeId> index);
Tensor stop_gradient(const Tensor& a);
/// Mean softmax cross-entropy of logits rows against integer labels.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);
/// Mean absolute error against a constant target.
Tensor l1_loss(const Tensor& pred, const Matrix& target);
/// Inverted dropout with a fixed mask drawn from rng; identity when p == 0.
Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng);

/// Straight-through estimator: forward value is `hard`, backward passes the
/// upstream gradient to m unchanged (the 1 - stopgrad(m) + m construction).
Tensor straight_through(const Tensor& m, Matrix hard);
/// Forward 1[m > tau], identity gradient.
Tensor straight_through_threshold(const Tensor& m, double tau);

// Sparse-pattern primitives. Entry vectors are nnz x 1.
/// Softmax over the entries of each row of the pattern.
Tensor segment_softmax(const Tensor& z, const SparsePattern& p);
/// out[r] = sum over entries e of row r of w[e] * h[cols[e]].
Tensor segment_aggregate(const Tensor& w, const Tensor& h, const SparsePattern& p);
/// out[e] = x(rows[e], cols[e]).
Tensor gather_entries(const Tensor& x, const SparsePattern& p);
/// out[e] = <q[rows[e]], k[cols[e]]>.
Tensor pair_dot(const Tensor& q, const Tensor& k, const SparsePattern& p);

}  // namespace degta::ad

#endif  // DEGTA_AUTOGRAD_HPP
