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


#ifndef POINTMASK_TRAIN_GRADCHECK_SUITE_HPP_
#define POINTMASK_TRAIN_GRADCHECK_SUITE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pointmask::train {

struct GradCheckCase {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;  // perturbed entries
  bool passed = false;
};

struct GradCheckSuite {
  std::vector<GradCheckCase> cases;
  double tolerance = 0.0;
  double seconds = 0.0;

  bool passed() const;
};

/// Central-difference checks of every differentiable op and of the full
/// PointMask and PointMap losses on a micro model: 8 points, 2 classes, desk
/// widths, fixed eps, batch norm in eval mode and no dropout.
GradCheckSuite run_gradcheck_suite(double tolerance = 1e-4, std::uint64_t seed = 0);

}  // namespace pointmask::train

#endif  // POINTMASK_TRAIN_GRADCHECK_SUITE_HPP_
