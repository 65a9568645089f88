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

#ifndef POINTMASK_DATA_AUGMENT_HPP_
#define POINTMASK_DATA_AUGMENT_HPP_

#include <array>
#include <string_view>

#include "core/rng.hpp"
#include "data/point_cloud.hpp"

namespace pointmask::data {

using Rotation = std::array<std::array<double, 3>, 3>;

Rotation rotation_x(double angle);
Rotation rotation_y(double angle);
Rotation rotation_z(double angle);
Rotation compose(const Rotation& a, const Rotation& b);  // a * b
PointCloud apply_rotation(const PointCloud& cloud, const Rotation& r);

inline constexpr double kJitterSigma = 0.01;
inline constexpr double kJitterClip = 0.05;

/// Adds clipped Gaussian noise N(0, sigma^2) to every coordinate.
PointCloud jitter(const PointCloud& cloud, double sigma, double clip, Rng& rng);

enum class RotationMode {
  kSingleAxis,  // uniform angle about the up (y) axis
  kThreeAxis,   // Rz(gamma) Ry(beta) Rx(alpha), independent uniform angles
};

Rotation random_rotation(RotationMode mode, Rng& rng);
PointCloud rotate(const PointCloud& cloud, RotationMode mode, Rng& rng);

enum class Augmentation { kNone, kJitter, kJitterRot1, kJitterRot3 };

Augmentation parse_augmentation(std::string_view name);
std::string_view augmentation_name(Augmentation a);

PointCloud augment(const PointCloud& cloud, Augmentation a, Rng& rng);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_AUGMENT_HPP_
