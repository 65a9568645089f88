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

#ifndef POINTMASK_DATA_SHAPES_HPP_
#define POINTMASK_DATA_SHAPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "data/point_cloud.hpp"

namespace pointmask::data {

/// Analytic primitives in class-index order.
std::span<const std::string_view> shape_catalog();

/// Area-uniform samples on the unscaled primitive: unit sphere, cube of
/// half-extent 1, and so on. Throws ConfigError on unknown names.
PointCloud sample_primitive(std::string_view shape, std::size_t n, Rng& rng);

/// Primitive sample, per-axis scale drawn from U[0.8, 1.2], then
/// normalize_unit_sphere. Requires n >= 4.
PointCloud gen_synthetic_shape(std::string_view shape, std::size_t n, Rng& rng);

struct SyntheticSpec {
  std::size_t num_classes = 6;
  std::size_t per_class = 100;
  std::size_t num_points = 256;
  std::uint64_t seed = 0;
};

/// Class-major synthetic dataset. Sample i draws from its own stream derived
/// from (seed, i), and coordinates are rounded to float precision so the
/// dataset survives a save/load cycle unchanged.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_SHAPES_HPP_
