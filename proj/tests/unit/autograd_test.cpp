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

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "degta/error.hpp"
#include "degta/gradcheck.hpp"
#include "doctest.h"
#include "oracles.hpp"

using degta::Matrix;
using degta::ad::Tape;
using degta::ad::Tensor;
namespace ad = degta::ad;
using Inputs = std::span<const Tensor>;

namespace {

/// Scalar reduction with fixed pseudo-random weights derived from the shape.
Tensor weighted_sum(const Tensor& y) {
  std::mt19937_64 rng(1000 * y.rows() + y.cols());
  return ad::sum(ad::elementwise_mul(y, y.tape().constant(oracle::random_matrix(y.rows(), y.cols(), rng))));
}

/// Values in [0.1, 1] with random signs.
Matrix away_from_zero(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m = oracle::random_matrix(rows, cols, rng);
  for (double& v : m.values()) v = std::copysign(0.1 + 0.9 * std::abs(v), v);
  return m;
}

/// A sparse pattern with a random nonempty subset of columns in each row.
ad::SparsePattern random_pattern(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix dense(rows, cols);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> pick(0, cols - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) dense(r, c) = coin(rng) ? 1.0 : 0.0;
    dense(r, pick(rng)) = 1.0;
  }
  return ad::SparsePattern::from_nonzeros(dense);
}

struct Shape {
  std::size_t rows, cols, inner;
};

Shape random_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> extent(1, 5);
  return {extent(rng), extent(rng), extent(rng)};
}

using Case = std::function<std::vector<Matrix>(const Shape&, std::mt19937_64&)>;

void check_primitive(const std::string& name, const Case& make_inputs,
                     const std::function<Tensor(Inputs, const Shape&)>& op) {
  std::mt19937_64 rng(std::hash<std::string>{}(name));
  for (int trial = 0; trial < 10; ++trial) {
    const Shape shape = random_shape(rng);
    const auto inputs = make_inputs(shape, rng);
    const auto res = degta::grad_check([&](Tape&, Inputs in) { return weighted_sum(op(in, shape)); }, inputs);
    INFO(name << " trial " << trial);
    CHECK(res.max_rel_error < 1e-6);
  }
}

}  // namespace

TEST_SUITE("tensor-autograd") {
  TEST_CASE("forward examples") {
    Tape t;
    const Tensor s = ad::row_softmax(t.constant(Matrix(1, 4)));
    for (double v : s.value().values()) CHECK(v == 0.25);
    CHECK(ad::leaky_relu(t.constant(Matrix(1, 1, -1.0)), 0.2).value()[0] == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(ad::leaky_relu(t.constant(Matrix(1, 1, 3.0)), 0.2).value()[0] == 3.0);
    const Tensor m = ad::mean_rows(t.constant(Matrix::from_rows({{1, 2}, {3, 4}})));
    CHECK(m.value() == Matrix::from_rows({{2, 3}}));
  }

  TEST_CASE("gradient of sum(x * x) at [1, 2] is [2, 4]") {
    Tape t;
    const Tensor x = t.variable(Matrix::from_rows({{1, 2}}));
    t.backward(ad::sum(ad::elementwise_mul(x, x)));
    CHECK(x.grad() == Matrix::from_rows({{2, 4}}));
  }

  TEST_CASE("gradients accumulate on shared parents") {
    Tape t;
    const Tensor x = t.variable(Matrix::from_rows({{1, -2, 3}}));
    t.backward(ad::sum(ad::add(ad::scale(x, 2.0), x)));
    CHECK(x.grad() == Matrix(1, 3, 3.0));
  }

  TEST_CASE("backward visits each node once") {
    Tape t;
    const Tensor x = t.variable(Matrix(1, 1, 2.0));
    Tensor y = x;
    for (int i = 0; i < 10; ++i) y = ad::add(y, y);
    t.backward(y);
    CHECK(x.grad()[0] == 1024.0);
  }

  TEST_CASE("grad has the shape of the value for every variable") {
    Tape t;
    std::mt19937_64 rng(3);
    const Tensor a = t.variable(oracle::random_matrix(3, 4, rng));
    const Tensor b = t.variable(oracle::random_matrix(4, 2, rng));
    const Tensor unused = t.variable(oracle::random_matrix(2, 5, rng));
    t.backward(ad::sum(ad::matmul(a, b)));
    CHECK(a.grad().same_shape(a.value()));
    CHECK(b.grad().same_shape(b.value()));
    CHECK(unused.grad() == Matrix(2, 5));
  }

  TEST_CASE("straight-through threshold") {
    Tape t;
    const Tensor m = t.variable(Matrix::from_rows({{0.6, 0.3, 0.1}}));
    const Tensor hard = ad::straight_through_threshold(m, 0.5);
    CHECK(hard.value() == Matrix::from_rows({{1, 0, 0}}));
    const Matrix upstream = Matrix::from_rows({{0.7, -1.5, 2.25}});
    t.backward(ad::sum(ad::elementwise_mul(hard, t.constant(upstream))));
    CHECK(m.grad() == upstream);

    Tape t2;
    const Tensor all = ad::straight_through_threshold(t2.variable(Matrix::from_rows({{-5, 0, 5}})),
                                                      -std::numeric_limits<double>::infinity());
    CHECK(all.value() == Matrix(1, 3, 1.0));
  }

  TEST_CASE("stop_gradient contributes exactly zero") {
    Tape t;
    const Tensor x = t.variable(Matrix::from_rows({{1.5, -2.0}}));
    const Tensor y = ad::add(ad::stop_gradient(ad::scale(x, 3.0)), ad::elementwise_mul(x, x));
    CHECK(y.value() == Matrix::from_rows({{6.75, -2.0}}));
    t.backward(ad::sum(y));
    CHECK(x.grad() == Matrix::from_rows({{3.0, -4.0}}));

    Tape t2;
    const Tensor z = t2.variable(Matrix(2, 2, 1.0));
    t2.backward(ad::sum(ad::stop_gradient(z)));
    CHECK(z.grad() == Matrix(2, 2));
  }

  TEST_CASE("cross-entropy on logits [0, 0]") {
    for (int label : {0, 1}) {
      Tape t;
      const Tensor logits = t.variable(Matrix(1, 2));
      const std::vector<int> labels{label};
      const Tensor loss = ad::cross_entropy(logits, labels);
      CHECK(loss.value()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
      t.backward(loss);
      CHECK(logits.grad()(0, label) == -0.5);
      CHECK(logits.grad()(0, 1 - label) == 0.5);
    }
  }

  TEST_CASE("cross-entropy averages over rows and validates labels") {
    Tape t;
    const Tensor logits = t.variable(Matrix::from_rows({{2, 0, 0}, {0, 0, 0}}));
    const std::vector<int> labels{0, 2};
    const double row0 = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0));
    CHECK(ad::cross_entropy(logits, labels).value()[0] == doctest::Approx((row0 + std::log(3.0)) / 2).epsilon(1e-14));
    const std::vector<int> bad{0, 3};
    CHECK_THROWS_AS(ad::cross_entropy(logits, bad), degta::Error);
    const std::vector<int> short_labels{0};
    CHECK_THROWS_AS(ad::cross_entropy(logits, short_labels), degta::Error);
  }

  TEST_CASE("l1 loss is zero for perfect predictions") {
    Tape t;
    const Matrix target = Matrix::from_rows({{0.25, -1.0}});
    CHECK(ad::l1_loss(t.constant(target), target).value()[0] == 0.0);
    CHECK(ad::l1_loss(t.constant(Matrix(1, 2)), target).value()[0] == 0.625);
  }

  TEST_CASE("masked softmax zeroes masked entries and handles empty rows") {
    Tape t;
    const Tensor x = t.variable(Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}));
    const Matrix mask = Matrix::from_rows({{1, 0, 1}, {0, 0, 0}});
    CHECK_THROWS_AS(ad::masked_row_softmax(x, mask), degta::Error);
    std::vector<bool> empty;
    const Tensor s = ad::masked_row_softmax(x, mask, true, &empty);
    CHECK(empty == std::vector<bool>{false, true});
    CHECK(s.value()(0, 1) == 0.0);
    CHECK(s.value()(0, 0) + s.value()(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.value()(0, 2) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-14));
    for (double v : s.value().row(1)) CHECK(v == 0.0);
  }

  TEST_CASE("shape mismatches are errors") {
    Tape t;
    const Tensor a = t.constant(Matrix(2, 3));
    const Tensor b = t.constant(Matrix(2, 2));
    CHECK_THROWS_AS(ad::matmul(a, b), degta::Error);
    CHECK_THROWS_AS(ad::add(a, b), degta::Error);
    CHECK_THROWS_AS(ad::elementwise_mul(a, b), degta::Error);
    CHECK_THROWS_AS(ad::concat_rows(a, b), degta::Error);
    CHECK_THROWS_AS(ad::masked_row_softmax(a, Matrix(3, 3, 1.0)), degta::Error);
  }

  TEST_CASE("property: row_softmax rows are nonnegative and sum to 1") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      Tape t;
      const Shape s = random_shape(rng);
      const Tensor y = ad::row_softmax(t.constant(oracle::random_matrix(s.rows, s.cols, rng, 30.0)));
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double total = 0.0;
        for (double v : y.value().row(r)) {
          CHECK(v >= 0.0);
          total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }

  TEST_CASE("grad_check on x^2 at 3") {
    const auto res = degta::grad_check([](Tape&, Inputs in) { return ad::sum(ad::elementwise_mul(in[0], in[0])); },
                                       {Matrix(1, 1, 3.0)});
    CHECK(res.max_rel_error < 1e-9);
    CHECK(res.entries == 1);
  }

  TEST_CASE("grad_check reports non-finite outputs") {
    CHECK_THROWS_AS(degta::grad_check([](Tape&, Inputs in) { return ad::sum(ad::log(in[0])); }, {Matrix(1, 1, 0.0)}),
                    degta::Error);
  }

  TEST_CASE("property: every differentiable primitive passes grad_check on 10 random shapes") {
    auto one = [](auto rows, auto cols) {
      return [rows, cols](const Shape& s, std::mt19937_64& rng) {
        return std::vector<Matrix>{oracle::random_matrix(rows(s), cols(s), rng)};
      };
    };
    auto r = [](const Shape& s) { return s.rows; };
    auto c = [](const Shape& s) { return s.cols; };
    auto two_same = [](const Shape& s, std::mt19937_64& rng) {
      return std::vector<Matrix>{oracle::random_matrix(s.rows, s.cols, rng),
                                 oracle::random_matrix(s.rows, s.cols, rng)};
    };

    check_primitive(
        "matmul",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.inner, rng),
                                     oracle::random_matrix(s.inner, s.cols, rng)};
        },
        [](Inputs in, const Shape&) { return ad::matmul(in[0], in[1]); });
    check_primitive(
        "matmul_nt",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.inner, rng),
                                     oracle::random_matrix(s.cols, s.inner, rng)};
        },
        [](Inputs in, const Shape&) { return ad::matmul_nt(in[0], in[1]); });
    check_primitive("transpose", one(r, c), [](Inputs in, const Shape&) { return ad::transpose(in[0]); });
    check_primitive("add", two_same, [](Inputs in, const Shape&) { return ad::add(in[0], in[1]); });
    check_primitive("sub", two_same, [](Inputs in, const Shape&) { return ad::sub(in[0], in[1]); });
    check_primitive(
        "add_row",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.cols, rng), oracle::random_matrix(1, s.cols, rng)};
        },
        [](Inputs in, const Shape&) { return ad::add_row(in[0], in[1]); });
    check_primitive("scale", one(r, c), [](Inputs in, const Shape&) { return ad::scale(in[0], -1.75); });
    check_primitive(
        "mul_scalar",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.cols, rng), oracle::random_matrix(1, 1, rng)};
        },
        [](Inputs in, const Shape&) { return ad::mul_scalar(in[0], in[1]); });
    check_primitive("elementwise_mul", two_same,
                    [](Inputs in, const Shape&) { return ad::elementwise_mul(in[0], in[1]); });
    check_primitive(
        "concat_cols",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.cols, rng),
                                     oracle::random_matrix(s.rows, s.inner, rng)};
        },
        [](Inputs in, const Shape&) { return ad::concat_cols(in[0], in[1]); });
    check_primitive(
        "concat_rows",
        [](const Shape& s, std::mt19937_64& rng) {
          return std::vector<Matrix>{oracle::random_matrix(s.rows, s.cols, rng),
                                     oracle::random_matrix(s.inner, s.cols, rng)};
        },
        [](Inputs in, const Shape&) { return ad::concat_rows(in[0], in[1]); });
    check_primitive("slice_cols", one(r, [](const Shape& s) { return s.cols + 2; }),
                    [](Inputs in, const Shape& s) { return ad::slice_cols(in[0], 1, s.cols + 1); });
    check_primitive(
        "leaky_relu",
        [](const Shape& s, std::mt19937_64& rng) { return std::vector<Matrix>{away_from_zero(s.rows, s.cols, rng)}; },
        [](Inputs in, const Shape&) { return ad::leaky_relu(in[0], 0.2); });
    check_primitive("exp", one(r, c), [](Inputs in, const Shape&) { return ad::exp(in[0]); });
    check_primitive(
        "log",
        [](const Shape& s, std::mt19937_64& rng) {
          Matrix m = oracle::random_matrix(s.rows, s.cols, rng);
          for (double& v : m.values()) v = 0.5 + std::abs(v);
          return std::vector<Matrix>{m};
        },
        [](Inputs in, const Shape&) { return ad::log(in[0]); });
    check_primitive("row_softmax", one(r, c), [](Inputs in, const Shape&) { return ad::row_softmax(in[0]); });
    check_primitive("masked_row_softmax", one(r, c), [](Inputs in, const Shape& s) {
      Matrix mask(s.rows, s.cols);
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (i % 3 != 1) ? 1.0 : 0.0;
      return ad::masked_row_softmax(in[0], mask, true);
    });
    check_primitive("sum", one(r, c), [](Inputs in, const Shape&) { return ad::sum(in[0]); });
    check_primitive("mean_rows", one(r, c), [](Inputs in, const Shape&) { return ad::mean_rows(in[0]); });
    check_primitive("gather_rows", one(r, c), [](Inputs in, const Shape& s) {
      std::vector<degta::NodeId> index;
      for (std::size_t i = 0; i < 2 * s.rows + 1; ++i) index.push_back(static_cast<degta::NodeId>((i * 7) % s.rows));
      return ad::gather_rows(in[0], index);
    });
    check_primitive("cross_entropy", one(r, [](const Shape& s) { return s.cols + 1; }), [](Inputs in, const Shape& s) {
      std::vector<int> labels;
      for (std::size_t i = 0; i < s.rows; ++i) labels.push_back(static_cast<int>((i * 5 + 1) % (s.cols + 1)));
      return ad::cross_entropy(in[0], labels);
    });
    check_primitive(
        "l1_loss",
        [](const Shape& s, std::mt19937_64& rng) { return std::vector<Matrix>{away_from_zero(s.rows, s.cols, rng)}; },
        [](Inputs in, const Shape& s) { return ad::l1_loss(in[0], Matrix(s.rows, s.cols)); });
    check_primitive("dropout", one(r, c), [](Inputs in, const Shape&) {
      std::mt19937_64 mask_rng(5);
      return ad::dropout(in[0], 0.4, mask_rng);
    });
  }

  TEST_CASE("property: sparse primitives pass grad_check on 10 random patterns") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const Shape s = random_shape(rng);
      auto pattern = std::make_shared<ad::SparsePattern>(random_pattern(s.rows, s.cols, rng));
      const std::size_t nnz = pattern->nnz();
      const std::size_t width = s.inner;
      INFO("trial " << trial);
      CHECK(degta::grad_check([&](Tape&, Inputs in) { return weighted_sum(ad::segment_softmax(in[0], *pattern)); },
                              {oracle::random_matrix(nnz, 1, rng)})
                .max_rel_error < 1e-6);
      CHECK(degta::grad_check(
                [&](Tape&, Inputs in) { return weighted_sum(ad::segment_aggregate(in[0], in[1], *pattern)); },
                {oracle::random_matrix(nnz, 1, rng), oracle::random_matrix(s.cols, width, rng)})
                .max_rel_error < 1e-6);
      CHECK(degta::grad_check([&](Tape&, Inputs in) { return weighted_sum(ad::gather_entries(in[0], *pattern)); },
                              {oracle::random_matrix(s.rows, s.cols, rng)})
                .max_rel_error < 1e-6);
      CHECK(degta::grad_check([&](Tape&, Inputs in) { return weighted_sum(ad::pair_dot(in[0], in[1], *pattern)); },
                              {oracle::random_matrix(s.rows, width, rng), oracle::random_matrix(s.cols, width, rng)})
                .max_rel_error < 1e-6);
    }
  }

  TEST_CASE("sparse primitives match dense loops") {
    std::mt19937_64 rng(8);
    const ad::SparsePattern p = random_pattern(4, 5, rng);
    Tape t;
    const Matrix z = oracle::random_matrix(p.nnz(), 1, rng);
    const Matrix h = oracle::random_matrix(5, 3, rng);
    const Tensor w = ad::segment_softmax(t.constant(z), p);
    const Tensor out = ad::segment_aggregate(w, t.constant(h), p);
    for (std::size_t r = 0; r < 4; ++r) {
      std::vector<double> logits;
      for (std::size_t e = p.offsets[r]; e < p.offsets[r + 1]; ++e) logits.push_back(z[e]);
      const auto soft = oracle::softmax(logits);
      for (std::size_t c = 0; c < 3; ++c) {
        double expected = 0.0;
        for (std::size_t e = p.offsets[r]; e < p.offsets[r + 1]; ++e)
          expected += soft[e - p.offsets[r]] * h(p.cols[e], c);
        CHECK(std::abs(out.value()(r, c) - expected) < 1e-14);
      }
    }
  }
}
