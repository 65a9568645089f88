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

#ifndef POINTMASK_DATA_MESH_HPP_
#define POINTMASK_DATA_MESH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "data/point_cloud.hpp"

namespace pointmask::data {

using Triangle = std::array<std::uint32_t, 3>;

struct Mesh {
  std::vector<Point3> vertices;
  std::vector<Triangle> faces;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Parses an OFF mesh. The counts may follow "OFF" on the header line
/// ("OFF8 6 0"). Polygons are fan-triangulated around their first vertex.
/// Throws ParseError carrying the offending line number.
Mesh off_parse(std::string_view text);
Mesh off_read_file(const std::string& path);
/// Triangles only; round-trips through off_parse.
std::string off_serialize(const Mesh& mesh);

double triangle_area(const Point3& a, const Point3& b, const Point3& c);

/// Area-weighted triangle choice, then a uniform barycentric point inside it.
PointCloud sample_mesh_surface(const Mesh& mesh, std::size_t n, Rng& rng);

/// Index of the triangle picked by a uniform draw u in [0, 1) against the
/// normalized cumulative areas. Exposed for tests.
std::size_t pick_weighted(const std::vector<double>& cumulative, double u);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_MESH_HPP_
