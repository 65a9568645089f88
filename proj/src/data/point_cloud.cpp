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

#include "data/point_cloud.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"

namespace pointmask::data {

std::size_t Dataset::num_points() const {
  if (samples.empty()) return 0;
  const std::size_t n = samples.front().cloud.size();
  for (const LabeledSample& s : samples) {
    if (s.cloud.size() != n) return 0;
  }
  return n;
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].cloud.size() == 0) {
      throw ConfigError("sample " + std::to_string(i) + " has no points");
    }
    if (samples[i].label >= num_classes()) {
      throw ConfigError("sample " + std::to_string(i) + " has label " +
                        std::to_string(samples[i].label) + " outside " +
                        std::to_string(num_classes()) + " classes");
    }
  }
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.size() == 0) throw DomainError("normalize_unit_sphere: empty cloud");
  Point3 centroid{0.0, 0.0, 0.0};
  for (const Point3& p : cloud.points) centroid = centroid + p;
  centroid = (1.0 / static_cast<double>(cloud.size())) * centroid;
  PointCloud out;
  out.points.reserve(cloud.size());
  double radius = 0.0;
  for (const Point3& p : cloud.points) {
    out.points.push_back(p - centroid);
    radius = std::max(radius, norm(out.points.back()));
  }
  if (!(radius > 0.0)) throw DomainError("normalize_unit_sphere: all points coincide");
  for (Point3& p : out.points) p = (1.0 / radius) * p;
  return out;
}

PointCloud quantize_f32(const PointCloud& cloud) {
  PointCloud out = cloud;
  for (Point3& p : out.points) {
    for (double& c : p) c = static_cast<double>(static_cast<float>(c));
  }
  return out;
}

ad::Tensor to_tensor(const PointCloud& cloud) {
  if (cloud.size() == 0) throw DomainError("to_tensor: empty cloud");
  ad::Tensor t({cloud.size(), 3});
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) t.at(i, c) = cloud.points[i][c];
  }
  return t;
}

PointCloud from_tensor(const ad::Tensor& points) {
  if (points.rank() != 2 || points.cols() != 3) {
    throw DimensionError("from_tensor: expected [n x 3], got " + ad::shape_string(points.shape()));
  }
  PointCloud cloud;
  cloud.points.resize(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    cloud.points[i] = {points.at(i, 0), points.at(i, 1), points.at(i, 2)};
  }
  return cloud;
}

PointCloud pad_cyclic(const PointCloud& cloud, std::size_t count) {
  if (cloud.size() == 0) throw DomainError("pad_cyclic: empty cloud");
  if (count < cloud.size()) {
    throw DimensionError("pad_cyclic: cloud of " + std::to_string(cloud.size()) +
                         " points exceeds target " + std::to_string(count));
  }
  PointCloud out;
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.points.push_back(cloud.points[i % cloud.size()]);
  return out;
}

}  // namespace pointmask::data
