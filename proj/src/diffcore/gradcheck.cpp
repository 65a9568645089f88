// Copyright 2026 The PointMask Authors.
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

#include "diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace pointmask::ad {
namespace {

double evaluate(const ScalarFunction& f, const Tensor& x) {
  Tape tape;
  Var out = f(tape, tape.constant(x));
  if (out.value().size() != 1) throw ContractError("grad_check: function is not scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw DomainError("grad_check: non-finite function value");
  return v;
}

}  // namespace

GradCheckReport grad_check_report(const ScalarFunction& f, const Tensor& x, double h,
                                  const std::vector<std::size_t>& coordinates) {
  if (!(h >= 1e-7 && h <= 1e-4)) {
    throw DomainError("grad_check: step " + std::to_string(h) + " outside [1e-7, 1e-4]");
  }
  Tape tape;
  Var input = tape.variable(x);
  Var out = f(tape, input);
  if (out.value().size() != 1) throw ContractError("grad_check: function is not scalar");
  if (!std::isfinite(out.value()[0])) {
    throw DomainError("grad_check: non-finite function value");
  }
  tape.backward(out);
  const Tensor analytic = input.grad();

  std::vector<std::size_t> indices = coordinates;
  if (indices.empty()) {
    indices.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) indices[i] = i;
  }

  GradCheckReport report;
  Tensor probe = x;
  for (std::size_t i : indices) {
    if (i >= x.size()) throw IndexError("grad_check: coordinate out of range");
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = evaluate(f, probe);
    probe[i] = saved - h;
    const double down = evaluate(f, probe);
    probe[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    if (err >= report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  return report;
}

double grad_check(const ScalarFunction& f, const Tensor& x, double h) {
  return grad_check_report(f, x, h).max_rel_error;
}

}  // namespace pointmask::ad
