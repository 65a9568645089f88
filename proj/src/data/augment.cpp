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

#include "data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace pointmask::data {

Rotation rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

Rotation rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Rotation rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

Rotation compose(const Rotation& a, const Rotation& b) {
  Rotation r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += a[i][k] * b[k][j];
      r[i][j] = acc;
    }
  }
  return r;
}

PointCloud apply_rotation(const PointCloud& cloud, const Rotation& r) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    out.points.push_back({r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
                          r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
                          r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2]});
  }
  return out;
}

PointCloud jitter(const PointCloud& cloud, double sigma, double clip, Rng& rng) {
  if (!(sigma > 0.0 && clip > 0.0)) throw DomainError("jitter: sigma and clip must be positive");
  std::normal_distribution<double> noise(0.0, sigma);
  PointCloud out = cloud;
  for (Point3& p : out.points) {
    for (double& c : p) c += std::clamp(noise(rng), -clip, clip);
  }
  return out;
}

Rotation random_rotation(RotationMode mode, Rng& rng) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (mode == RotationMode::kSingleAxis) return rotation_y(uniform(rng, 0.0, kTwoPi));
  const double alpha = uniform(rng, 0.0, kTwoPi);
  const double beta = uniform(rng, 0.0, kTwoPi);
  const double gamma = uniform(rng, 0.0, kTwoPi);
  return compose(rotation_z(gamma), compose(rotation_y(beta), rotation_x(alpha)));
}

PointCloud rotate(const PointCloud& cloud, RotationMode mode, Rng& rng) {
  return apply_rotation(cloud, random_rotation(mode, rng));
}

Augmentation parse_augmentation(std::string_view name) {
  for (Augmentation a : {Augmentation::kNone, Augmentation::kJitter, Augmentation::kJitterRot1,
                         Augmentation::kJitterRot3}) {
    if (name == augmentation_name(a)) return a;
  }
  throw ConfigError("unknown augmentation '" + std::string(name) +
                    "' (expected none|jitter|jitter+rot1|jitter+rot3)");
}

std::string_view augmentation_name(Augmentation a) {
  switch (a) {
    case Augmentation::kNone: return "none";
    case Augmentation::kJitter: return "jitter";
    case Augmentation::kJitterRot1: return "jitter+rot1";
    case Augmentation::kJitterRot3: return "jitter+rot3";
  }
  return "none";
}

PointCloud augment(const PointCloud& cloud, Augmentation a, Rng& rng) {
  switch (a) {
    case Augmentation::kNone: return cloud;
    case Augmentation::kJitter: return jitter(cloud, kJitterSigma, kJitterClip, rng);
    case Augmentation::kJitterRot1:
      return jitter(rotate(cloud, RotationMode::kSingleAxis, rng), kJitterSigma, kJitterClip, rng);
    case Augmentation::kJitterRot3:
      return jitter(rotate(cloud, RotationMode::kThreeAxis, rng), kJitterSigma, kJitterClip, rng);
  }
  return cloud;
}

}  // namespace pointmask::data
