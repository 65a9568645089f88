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

#ifndef POINTMASK_DATA_POINT_CLOUD_HPP_
#define POINTMASK_DATA_POINT_CLOUD_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "diffcore/tensor.hpp"

namespace pointmask::data {

using Point3 = std::array<double, 3>;

inline double norm(const Point3& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

inline Point3 operator+(const Point3& a, const Point3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point3 operator*(double s, const Point3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline Point3 cross(const Point3& a, const Point3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const noexcept { return points.size(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct LabeledSample {
  PointCloud cloud;
  std::uint32_t label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names;

  std::size_t num_classes() const noexcept { return class_names.size(); }
  /// Common point count, or 0 when samples differ in size.
  std::size_t num_points() const;
  /// Throws ConfigError on labels outside [0, C) or empty clouds.
  void validate() const;
};

/// Centers on the centroid and scales the farthest point to norm one.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

/// Rounds every coordinate to the nearest 32-bit float, the precision of the
/// on-disk dataset format.
PointCloud quantize_f32(const PointCloud& cloud);

ad::Tensor to_tensor(const PointCloud& cloud);
PointCloud from_tensor(const ad::Tensor& points);

/// Repeats points cyclically until the cloud holds `count` points.
PointCloud pad_cyclic(const PointCloud& cloud, std::size_t count);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_POINT_CLOUD_HPP_
