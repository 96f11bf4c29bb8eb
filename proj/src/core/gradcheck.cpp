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

#include "degta/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "degta/error.hpp"

namespace degta {

namespace {

double evaluate(const ScalarFn& f, const std::vector<Matrix>& inputs) {
  ad::Tape tape;
  std::vector<ad::Tensor> ts;
  ts.reserve(inputs.size());
  for (const auto& m : inputs) ts.push_back(tape.constant(m));
  const ad::Tensor out = f(tape, ts);
  require(out.rows() == 1 && out.cols() == 1, ErrorKind::kValidation, "grad_check: function is not scalar");
  const double v = out.value()[0];
  require(std::isfinite(v), ErrorKind::kNumeric, "grad_check: non-finite function value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const std::vector<Matrix>& inputs, double eps) {
  return grad_check(f, f, inputs, eps);
}

GradCheckResult grad_check(const ScalarFn& f, const ScalarFn& reference, const std::vector<Matrix>& inputs,
                           double eps) {
  require(eps > 0.0, ErrorKind::kUsage, "grad_check: eps must be positive");

  std::vector<Matrix> analytic;
  double kink = 0.0;
  {
    ad::Tape tape;
    std::vector<ad::Tensor> vars;
    for (const auto& m : inputs) vars.push_back(tape.variable(m));
    const ad::Tensor out = f(tape, vars);
    require(out.rows() == 1 && out.cols() == 1, ErrorKind::kValidation, "grad_check: function is not scalar");
    require(std::isfinite(out.value()[0]), ErrorKind::kNumeric, "grad_check: non-finite function value");
    tape.backward(out);
    for (const auto& v : vars) analytic.push_back(v.grad());
    kink = tape.kink_distance();
  }

  GradCheckResult res;
  res.kink_distance = kink;
  std::vector<Matrix> work = inputs;
  for (std::size_t t = 0; t < work.size(); ++t) {
    for (std::size_t i = 0; i < work[t].size(); ++i) {
      const double x0 = work[t][i];
      work[t][i] = x0 + eps;
      const double fp = evaluate(reference, work);
      work[t][i] = x0 - eps;
      const double fm = evaluate(reference, work);
      work[t][i] = x0;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[t][i];
      require(std::isfinite(a), ErrorKind::kNumeric, "grad_check: non-finite analytic gradient");
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max(std::abs(a) + std::abs(numeric), kRelativeFloor);
      res.max_rel_error = std::max(res.max_rel_error, rel);
      res.max_abs_error = std::max(res.max_abs_error, abs_err);
      ++res.entries;
    }
  }
  return res;
}

}  // namespace degta
