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

#include "degta/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degta/error.hpp"

namespace degta::ad {

namespace {

#define DEGTA_EXPECT(cond, op, detail)                                                           \
  do {                                                                                           \
    if (!(cond)) fail(ErrorKind::kValidation, std::string(op) + ": shape mismatch " + (detail)); \
  } while (false)

std::string shapes(const Tensor& a, const Tensor& b) {
  return a.value().shape_string() + " vs " + b.value().shape_string();
}

Tape& same_tape(const Tensor& a, const Tensor& b) {
  if (&a.tape() != &b.tape()) fail(ErrorKind::kValidation, "tensors belong to different tapes");
  return a.tape();
}

// Four independent accumulators keep the reduction off a single dependency chain.
double min_abs(std::span<const double> xs) {
  double lanes[4];
  std::fill(std::begin(lanes), std::end(lanes), std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= xs.size(); i += 4)
    for (std::size_t j = 0; j < 4; ++j) lanes[j] = std::min(lanes[j], std::abs(xs[i + j]));
  for (; i < xs.size(); ++i) lanes[0] = std::min(lanes[0], std::abs(xs[i]));
  return std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
}

// C += A * B
void acc_ab(Matrix& c, const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  const double* __restrict pa = a.values().data();
  const double* __restrict pb = b.values().data();
  double* __restrict pc = c.values().data();
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += pa[i * inner + k] * pb[k];
      pc[i] += s;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double* __restrict crow = pc + i * m;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = pa[i * inner + k];
      const double* __restrict brow = pb + k * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
}

// C += A * B^T, via an explicit transpose so the inner loop streams rows.
void acc_abt(Matrix& c, const Matrix& a, const Matrix& b) { acc_ab(c, a, b.transposed()); }

// C += A^T * B
void acc_atb(Matrix& c, const Matrix& a, const Matrix& b) {
  const std::size_t rows = a.rows(), n = a.cols(), m = b.cols();
  const double* __restrict pa = a.values().data();
  const double* __restrict pb = b.values().data();
  double* __restrict pc = c.values().data();
  for (std::size_t k = 0; k < rows; ++k) {
    const double* __restrict arow = pa + k * n;
    const double* __restrict brow = pb + k * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double aki = arow[i];
      double* __restrict crow = pc + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aki * brow[j];
    }
  }
}

void softmax_backward_rows(Matrix& gx, const Matrix& y, const Matrix& g) {
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) gx(r, c) += y(r, c) * (g(r, c) - dot);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor / Tape

const Matrix& Tensor::value() const { return tape_->value(id_); }

Matrix Tensor::grad() const {
  const Matrix& g = tape_->grad(id_);
  if (g.empty() && !value().empty()) return Matrix(value().rows(), value().cols());
  return g;
}

bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

Tensor Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}});
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}});
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::record(Matrix value, std::span<const Tensor> parents, Backward backward) {
  bool needs = false;
  for (const auto& p : parents) {
    if (&p.tape() != this) fail(ErrorKind::kValidation, "parent tensor recorded on a different tape");
    needs = needs || p.requires_grad();
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
  return Tensor(this, nodes_.size() - 1);
}

const SparsePattern& Tape::keep(SparsePattern pattern) {
  patterns_.push_back(std::make_unique<SparsePattern>(std::move(pattern)));
  return *patterns_.back();
}

Matrix& Tape::grad_accumulator(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(const Tensor& out) {
  if (&out.tape() != this) fail(ErrorKind::kValidation, "backward on a tensor from another tape");
  if (!out.requires_grad()) return;
  grad_accumulator(out.id()).fill(1.0);
  for (std::size_t i = out.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// SparsePattern

SparsePattern SparsePattern::from_nonzeros(const Matrix& m) {
  SparsePattern p;
  p.num_rows = m.rows();
  p.num_cols = m.cols();
  p.offsets.assign(m.rows() + 1, 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m(r, c) == 0.0) continue;
      p.rows.push_back(static_cast<NodeId>(r));
      p.cols.push_back(static_cast<NodeId>(c));
    }
    p.offsets[r + 1] = p.cols.size();
  }
  return p;
}

SparsePattern SparsePattern::from_graph(const Graph& g, bool include_self) {
  SparsePattern p;
  const std::size_t n = g.num_nodes();
  p.num_rows = p.num_cols = n;
  p.offsets.assign(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) {
    bool self_done = !include_self;
    for (NodeId v : g.neighbors(u)) {
      if (!self_done && u < v) {
        p.rows.push_back(u);
        p.cols.push_back(u);
        self_done = true;
      }
      p.rows.push_back(u);
      p.cols.push_back(v);
    }
    if (!self_done) {
      p.rows.push_back(u);
      p.cols.push_back(u);
    }
    p.offsets[u + 1] = p.cols.size();
  }
  return p;
}

// ---------------------------------------------------------------------------
// Dense primitives

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.cols() == b.rows(), "matmul", shapes(a, b));
  Matrix out(a.rows(), b.cols());
  acc_ab(out, a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(std::move(out), parents, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) acc_abt(tp.grad_accumulator(ia), g, tp.value(ib));
    if (tp.requires_grad(ib)) acc_atb(tp.grad_accumulator(ib), tp.value(ia), g);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.cols() == b.cols(), "matmul_nt", shapes(a, b));
  Matrix out(a.rows(), b.rows());
  acc_abt(out, a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(std::move(out), parents, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) acc_ab(tp.grad_accumulator(ia), g, tp.value(ib));
    if (tp.requires_grad(ib)) acc_atb(tp.grad_accumulator(ib), g, tp.value(ia));
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(a.value().transposed(), parents, [ia](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.value().same_shape(b.value()), "add", shapes(a, b));
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(std::move(out), parents, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    for (std::size_t id : {ia, ib}) {
      if (!tp.requires_grad(id)) continue;
      Matrix& gx = tp.grad_accumulator(id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor add_row(const Tensor& a, const Tensor& row) {
  Tape& t = same_tape(a, row);
  DEGTA_EXPECT(row.rows() == 1 && row.cols() == a.cols(), "add_row", shapes(a, row));
  Matrix out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += row.value()[c];
  const std::size_t ia = a.id(), ib = row.id();
  const Tensor parents[] = {a, row};
  return t.record(std::move(out), parents, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad_accumulator(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  Matrix out = a.value();
  for (double& v : out.values()) v *= c;
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia, c](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  Tape& t = same_tape(a, s);
  DEGTA_EXPECT(s.rows() == 1 && s.cols() == 1, "mul_scalar", shapes(a, s));
  const double sv = s.value()[0];
  Matrix out = a.value();
  for (double& v : out.values()) v *= sv;
  const std::size_t ia = a.id(), is = s.id();
  const Tensor parents[] = {a, s};
  return t.record(std::move(out), parents, [ia, is](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& av = tp.value(ia);
    if (tp.requires_grad(ia)) {
      const double sv2 = tp.value(is)[0];
      Matrix& ga = tp.grad_accumulator(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sv2 * g[i];
    }
    if (tp.requires_grad(is)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      tp.grad_accumulator(is)[0] += acc;
    }
  });
}

Tensor elementwise_mul(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.value().same_shape(b.value()), "elementwise_mul", shapes(a, b));
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(std::move(out), parents, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad_accumulator(ia);
      const Matrix& bv = tp.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad_accumulator(ib);
      const Matrix& av = tp.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.rows() == b.rows(), "concat_cols", shapes(a, b));
  const std::size_t ca = a.cols(), cb = b.cols();
  Matrix out(a.rows(), ca + cb);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    std::copy(a.value().row(r).begin(), a.value().row(r).end(), out.row(r).begin());
    std::copy(b.value().row(r).begin(), b.value().row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(ca));
  }
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(std::move(out), parents, [ia, ib, ca, cb](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Matrix& ga = tp.grad_accumulator(ia);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
    }
    if (tp.requires_grad(ib)) {
      Matrix& gb = tp.grad_accumulator(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
    }
  });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  Tape& t = same_tape(a, b);
  DEGTA_EXPECT(a.cols() == b.cols(), "concat_rows", shapes(a, b));
  std::vector<double> data(a.value().storage());
  data.insert(data.end(), b.value().storage().begin(), b.value().storage().end());
  const std::size_t na = a.value().size();
  const std::size_t ia = a.id(), ib = b.id();
  const Tensor parents[] = {a, b};
  return t.record(Matrix(a.rows() + b.rows(), a.cols(), std::move(data)), parents,
                  [ia, ib, na](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    if (tp.requires_grad(ia)) {
                      Matrix& ga = tp.grad_accumulator(ia);
                      for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                    }
                    if (tp.requires_grad(ib)) {
                      Matrix& gb = tp.grad_accumulator(ib);
                      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
                    }
                  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  DEGTA_EXPECT(begin < end && end <= a.cols(), "slice_cols",
               "[" + std::to_string(begin) + "," + std::to_string(end) + ") of " + a.value().shape_string());
  Matrix out(a.rows(), end - begin);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = a.value()(r, c);
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia, begin](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, begin + c) += g(r, c);
  });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  Matrix out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : v * slope;
  a.tape().note_kink_distance(min_abs(a.value().values()));
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia, slope](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& x = tp.value(ia);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += x[i] > 0.0 ? g[i] : slope * g[i];
  });
}

Tensor exp(const Tensor& a) {
  Matrix out = a.value();
  for (double& v : out.values()) v = std::exp(v);
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y = tp.value(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
  });
}

Tensor log(const Tensor& a) {
  Matrix out = a.value();
  for (double& v : out.values()) v = std::log(v);
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& x = tp.value(ia);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
  });
}

Tensor row_softmax(const Tensor& a) {
  Matrix out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double& v : row) s += (v = std::exp(v - mx));
    for (double& v : row) v /= s;
  }
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia](Tape& tp, std::size_t self) {
    softmax_backward_rows(tp.grad_accumulator(ia), tp.value(self), tp.grad(self));
  });
}

Tensor masked_row_softmax(const Tensor& a, const Matrix& mask, bool allow_empty, std::vector<bool>* empty_rows) {
  DEGTA_EXPECT(mask.same_shape(a.value()), "masked_row_softmax",
               a.value().shape_string() + " vs mask " + mask.shape_string());
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  if (empty_rows) empty_rows->assign(x.rows(), false);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask(r, c) != 0.0) {
        mx = std::max(mx, x(r, c));
        any = true;
      }
    if (!any) {
      if (!allow_empty) fail(ErrorKind::kNumeric, "masked_row_softmax: row " + std::to_string(r) + " is fully masked");
      if (empty_rows) (*empty_rows)[r] = true;
      continue;
    }
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask(r, c) != 0.0) s += (out(r, c) = std::exp(x(r, c) - mx));
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) /= s;
  }
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia](Tape& tp, std::size_t self) {
    // Masked entries have y = 0, so the dense softmax rule gives them zero gradient.
    softmax_backward_rows(tp.grad_accumulator(ia), tp.value(self), tp.grad(self));
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(Matrix(1, 1, s), parents, [ia](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad_accumulator(ia).values()) v += g;
  });
}

Tensor mean_rows(const Tensor& a) {
  const Matrix& x = a.value();
  DEGTA_EXPECT(x.rows() > 0, "mean_rows", "empty input");
  Matrix out(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out[c] += x(r, c);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : out.values()) v *= inv;
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia, inv](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c] * inv;
  });
}

Tensor gather_rows(const Tensor& a, std::span<const NodeId> index) {
  const Matrix& x = a.value();
  Matrix out(index.size(), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    DEGTA_EXPECT(index[i] < x.rows(), "gather_rows", "index " + std::to_string(index[i]) + " of " + x.shape_string());
    std::copy(x.row(index[i]).begin(), x.row(index[i]).end(), out.row(i).begin());
  }
  std::vector<NodeId> idx(index.begin(), index.end());
  const std::size_t ia = a.id();
  const Tensor parents[] = {a};
  return a.tape().record(std::move(out), parents, [ia, idx = std::move(idx)](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = g.row(i);
      auto dst = ga.row(idx[i]);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Tensor stop_gradient(const Tensor& a) { return a.tape().constant(a.value()); }

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const Matrix& x = logits.value();
  DEGTA_EXPECT(labels.size() == x.rows() && x.rows() > 0, "cross_entropy",
               x.shape_string() + " with " + std::to_string(labels.size()) + " labels");
  Matrix prob(x.rows(), x.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= x.cols())
      fail(ErrorKind::kValidation,
           "cross_entropy: label " + std::to_string(labels[r]) + " outside " + std::to_string(x.cols()) + " classes");
    auto row = x.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += (prob(r, c) = std::exp(row[c] - mx));
    for (std::size_t c = 0; c < x.cols(); ++c) prob(r, c) /= s;
    loss += std::log(s) + mx - row[static_cast<std::size_t>(labels[r])];
  }
  const double inv = 1.0 / static_cast<double>(x.rows());
  std::vector<int> lab(labels.begin(), labels.end());
  const std::size_t ia = logits.id();
  const Tensor parents[] = {logits};
  return logits.tape().record(Matrix(1, 1, loss * inv), parents,
                              [ia, inv, prob = std::move(prob), lab = std::move(lab)](Tape& tp, std::size_t self) {
                                const double g = tp.grad(self)[0] * inv;
                                Matrix& ga = tp.grad_accumulator(ia);
                                for (std::size_t r = 0; r < prob.rows(); ++r)
                                  for (std::size_t c = 0; c < prob.cols(); ++c)
                                    ga(r, c) += g * (prob(r, c) - (static_cast<int>(c) == lab[r] ? 1.0 : 0.0));
                              });
}

Tensor l1_loss(const Tensor& pred, const Matrix& target) {
  DEGTA_EXPECT(pred.value().same_shape(target) && !target.empty(), "l1_loss",
               pred.value().shape_string() + " vs target " + target.shape_string());
  double s = 0.0, nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = std::abs(pred.value()[i] - target[i]);
    s += d;
    nearest = std::min(nearest, d);
  }
  pred.tape().note_kink_distance(nearest);
  const double inv = 1.0 / static_cast<double>(target.size());
  const std::size_t ia = pred.id();
  const Tensor parents[] = {pred};
  return pred.tape().record(Matrix(1, 1, s * inv), parents, [ia, inv, target](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0] * inv;
    const Matrix& p = tp.value(ia);
    Matrix& ga = tp.grad_accumulator(ia);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] - target[i];
      ga[i] += d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
    }
  });
}

Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng) {
  require(p >= 0.0 && p < 1.0, ErrorKind::kUsage, "dropout probability must lie in [0,1)");
  if (p == 0.0) return a;
  Matrix mask(a.rows(), a.cols());
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  for (double& m : mask.values()) m = keep(rng) ? s : 0.0;
  return elementwise_mul(a, a.tape().constant(std::move(mask)));
}

Tensor straight_through(const Tensor& m, Matrix hard) {
  DEGTA_EXPECT(hard.same_shape(m.value()), "straight_through", m.value().shape_string() + " vs " + hard.shape_string());
  const std::size_t im = m.id();
  const Tensor parents[] = {m};
  return m.tape().record(std::move(hard), parents, [im](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& gm = tp.grad_accumulator(im);
    for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
  });
}

Tensor straight_through_threshold(const Tensor& m, double tau) {
  Matrix hard(m.rows(), m.cols());
  for (std::size_t i = 0; i < hard.size(); ++i) hard[i] = m.value()[i] > tau ? 1.0 : 0.0;
  return straight_through(m, std::move(hard));
}

// ---------------------------------------------------------------------------
// Sparse-pattern primitives. Patterns are captured by pointer and must
// outlive the tape's backward pass.

Tensor segment_softmax(const Tensor& z, const SparsePattern& p) {
  DEGTA_EXPECT(z.rows() == p.nnz() && z.cols() == 1, "segment_softmax",
               z.value().shape_string() + " for " + std::to_string(p.nnz()) + " entries");
  Matrix out(p.nnz(), 1);
  const Matrix& x = z.value();
  for (std::size_t r = 0; r < p.num_rows; ++r) {
    const std::size_t b = p.offsets[r], e = p.offsets[r + 1];
    if (b == e) continue;
    double mx = x[b];
    for (std::size_t k = b + 1; k < e; ++k) mx = std::max(mx, x[k]);
    double s = 0.0;
    for (std::size_t k = b; k < e; ++k) s += (out[k] = std::exp(x[k] - mx));
    for (std::size_t k = b; k < e; ++k) out[k] /= s;
  }
  const std::size_t iz = z.id();
  const SparsePattern* pat = &p;
  const Tensor parents[] = {z};
  return z.tape().record(std::move(out), parents, [iz, pat](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y = tp.value(self);
    Matrix& gz = tp.grad_accumulator(iz);
    for (std::size_t r = 0; r < pat->num_rows; ++r) {
      const std::size_t b = pat->offsets[r], e = pat->offsets[r + 1];
      double dot = 0.0;
      for (std::size_t k = b; k < e; ++k) dot += g[k] * y[k];
      for (std::size_t k = b; k < e; ++k) gz[k] += y[k] * (g[k] - dot);
    }
  });
}

Tensor segment_aggregate(const Tensor& w, const Tensor& h, const SparsePattern& p) {
  Tape& t = same_tape(w, h);
  DEGTA_EXPECT(w.rows() == p.nnz() && w.cols() == 1 && h.rows() == p.num_cols, "segment_aggregate",
               shapes(w, h) + " for pattern " + std::to_string(p.num_rows) + "x" + std::to_string(p.num_cols));
  const std::size_t d = h.cols();
  Matrix out(p.num_rows, d);
  const Matrix& wv = w.value();
  const Matrix& hv = h.value();
  for (std::size_t e = 0; e < p.nnz(); ++e) {
    auto src = hv.row(p.cols[e]);
    auto dst = out.row(p.rows[e]);
    const double we = wv[e];
    for (std::size_t c = 0; c < d; ++c) dst[c] += we * src[c];
  }
  const std::size_t iw = w.id(), ih = h.id();
  const SparsePattern* pat = &p;
  const Tensor parents[] = {w, h};
  return t.record(std::move(out), parents, [iw, ih, pat](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& hv2 = tp.value(ih);
    const Matrix& wv2 = tp.value(iw);
    const bool need_w = tp.requires_grad(iw), need_h = tp.requires_grad(ih);
    Matrix* gw = need_w ? &tp.grad_accumulator(iw) : nullptr;
    Matrix* gh = need_h ? &tp.grad_accumulator(ih) : nullptr;
    for (std::size_t e = 0; e < pat->nnz(); ++e) {
      auto grow = g.row(pat->rows[e]);
      if (gw) {
        auto hrow = hv2.row(pat->cols[e]);
        double s = 0.0;
        for (std::size_t c = 0; c < grow.size(); ++c) s += grow[c] * hrow[c];
        (*gw)[e] += s;
      }
      if (gh) {
        auto dst = gh->row(pat->cols[e]);
        const double we = wv2[e];
        for (std::size_t c = 0; c < grow.size(); ++c) dst[c] += we * grow[c];
      }
    }
  });
}

Tensor gather_entries(const Tensor& x, const SparsePattern& p) {
  DEGTA_EXPECT(
      x.rows() == p.num_rows && x.cols() == p.num_cols, "gather_entries",
      x.value().shape_string() + " for pattern " + std::to_string(p.num_rows) + "x" + std::to_string(p.num_cols));
  Matrix out(p.nnz(), 1);
  for (std::size_t e = 0; e < p.nnz(); ++e) out[e] = x.value()(p.rows[e], p.cols[e]);
  const std::size_t ix = x.id();
  const SparsePattern* pat = &p;
  const Tensor parents[] = {x};
  return x.tape().record(std::move(out), parents, [ix, pat](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad_accumulator(ix);
    for (std::size_t e = 0; e < pat->nnz(); ++e) gx(pat->rows[e], pat->cols[e]) += g[e];
  });
}

Tensor pair_dot(const Tensor& q, const Tensor& k, const SparsePattern& p) {
  Tape& t = same_tape(q, k);
  DEGTA_EXPECT(q.cols() == k.cols() && q.rows() == p.num_rows && k.rows() == p.num_cols, "pair_dot", shapes(q, k));
  Matrix out(p.nnz(), 1);
  for (std::size_t e = 0; e < p.nnz(); ++e) {
    auto qa = q.value().row(p.rows[e]);
    auto kb = k.value().row(p.cols[e]);
    double s = 0.0;
    for (std::size_t c = 0; c < qa.size(); ++c) s += qa[c] * kb[c];
    out[e] = s;
  }
  const std::size_t iq = q.id(), ik = k.id();
  const SparsePattern* pat = &p;
  const Tensor parents[] = {q, k};
  return t.record(std::move(out), parents, [iq, ik, pat](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& qv = tp.value(iq);
    const Matrix& kv = tp.value(ik);
    Matrix* gq = tp.requires_grad(iq) ? &tp.grad_accumulator(iq) : nullptr;
    Matrix* gk = tp.requires_grad(ik) ? &tp.grad_accumulator(ik) : nullptr;
    for (std::size_t e = 0; e < pat->nnz(); ++e) {
      const double ge = g[e];
      if (ge == 0.0) continue;
      if (gq) {
        auto dst = gq->row(pat->rows[e]);
        auto src = kv.row(pat->cols[e]);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += ge * src[c];
      }
      if (gk) {
        auto dst = gk->row(pat->cols[e]);
        auto src = qv.row(pat->rows[e]);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += ge * src[c];
      }
    }
  });
}

}  // namespace degta::ad
