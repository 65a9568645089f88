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

#ifndef POINTMASK_DIFFCORE_GRADCHECK_HPP_
#define POINTMASK_DIFFCORE_GRADCHECK_HPP_

#include <cstddef>
#include <functional>

#include "diffcore/tape.hpp"
#include "diffcore/tensor.hpp"

namespace pointmask::ad {

/// Scalar-valued function recorded on the supplied tape.
using ScalarFunction = std::function<Var(Tape& tape, Var x)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares the tape gradient of f at x with central differences of step h.
/// The error per coordinate is |analytic - numeric| / max(1, |analytic|).
/// When `coordinates` is non-empty only those entries of x are perturbed.
GradCheckReport grad_check_report(const ScalarFunction& f, const Tensor& x, double h = 1e-5,
                                  const std::vector<std::size_t>& coordinates = {});

double grad_check(const ScalarFunction& f, const Tensor& x, double h = 1e-5);

}  // namespace pointmask::ad

#endif  // POINTMASK_DIFFCORE_GRADCHECK_HPP_
