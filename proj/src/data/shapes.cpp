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

#include "data/shapes.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"
#include "data/mesh.hpp"

namespace pointmask::data {
namespace {

constexpr std::array<std::string_view, 8> kShapes = {
    "sphere", "cube", "cylinder", "cone", "torus", "pyramid", "octahedron", "prism"};

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSampleStream = 0x5348415045ULL;

Point3 on_sphere(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Point3 p{normal(rng), normal(rng), normal(rng)};
    const double r = norm(p);
    if (r > 1e-12) return (1.0 / r) * p;
  }
}

Point3 on_cube(Rng& rng) {
  std::uniform_int_distribution<int> face(0, 5);
  const int f = face(rng);
  const int axis = f / 2;
  Point3 p{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
  p[static_cast<std::size_t>(axis)] = (f % 2 == 0) ? 1.0 : -1.0;
  return p;
}

Point3 on_disk(double radius, double y, Rng& rng) {
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double phi = uniform(rng, 0.0, 2.0 * kPi);
  return {r * std::cos(phi), y, r * std::sin(phi)};
}

// Radius 0.5, height 2 along y.
Point3 on_cylinder(Rng& rng) {
  constexpr double r = 0.5;
  const double lateral = 2.0 * kPi * r * 2.0;
  const double cap = kPi * r * r;
  const double pick = uniform(rng, 0.0, lateral + 2.0 * cap);
  if (pick < lateral) {
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    return {r * std::cos(phi), uniform(rng, -1.0, 1.0), r * std::sin(phi)};
  }
  return on_disk(r, pick < lateral + cap ? 1.0 : -1.0, rng);
}

// Base radius 1 at y = -1, apex at y = 1.
Point3 on_cone(Rng& rng) {
  const double slant = std::sqrt(5.0);
  const double lateral = kPi * slant;
  const double base = kPi;
  if (uniform(rng, 0.0, lateral + base) < lateral) {
    // Area up to distance t from the apex grows like t^2.
    const double t = std::sqrt(uniform(rng, 0.0, 1.0));
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    return {t * std::cos(phi), 1.0 - 2.0 * t, t * std::sin(phi)};
  }
  return on_disk(1.0, -1.0, rng);
}

// Major radius 1, tube radius 0.35; rejection on the area element.
Point3 on_torus(Rng& rng) {
  constexpr double major = 1.0;
  constexpr double minor = 0.35;
  for (;;) {
    const double u = uniform(rng, 0.0, 2.0 * kPi);
    const double v = uniform(rng, 0.0, 2.0 * kPi);
    const double w = uniform(rng, 0.0, major + minor);
    if (w > major + minor * std::cos(v)) continue;
    const double ring = major + minor * std::cos(v);
    return {ring * std::cos(u), minor * std::sin(v), ring * std::sin(u)};
  }
}

Mesh pyramid_mesh() {
  Mesh m;
  m.vertices = {{-1, -1, -1}, {1, -1, -1}, {1, -1, 1}, {-1, -1, 1}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return m;
}

Mesh octahedron_mesh() {
  Mesh m;
  m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
             {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return m;
}

// Equilateral triangle cross-section extruded along z.
Mesh prism_mesh() {
  Mesh m;
  const double s = std::sqrt(3.0) / 2.0;
  m.vertices = {{0, 1, -1}, {-s, -0.5, -1}, {s, -0.5, -1},
                {0, 1, 1},  {-s, -0.5, 1},  {s, -0.5, 1}};
  m.faces = {{0, 1, 2}, {3, 5, 4}, {0, 3, 4}, {0, 4, 1},
             {1, 4, 5}, {1, 5, 2}, {2, 5, 3}, {2, 3, 0}};
  return m;
}

}  // namespace

std::span<const std::string_view> shape_catalog() { return kShapes; }

PointCloud sample_primitive(std::string_view shape, std::size_t n, Rng& rng) {
  if (shape == "pyramid") return sample_mesh_surface(pyramid_mesh(), n, rng);
  if (shape == "octahedron") return sample_mesh_surface(octahedron_mesh(), n, rng);
  if (shape == "prism") return sample_mesh_surface(prism_mesh(), n, rng);
  Point3 (*sampler)(Rng&) = nullptr;
  if (shape == "sphere") sampler = on_sphere;
  else if (shape == "cube") sampler = on_cube;
  else if (shape == "cylinder") sampler = on_cylinder;
  else if (shape == "cone") sampler = on_cone;
  else if (shape == "torus") sampler = on_torus;
  else throw ConfigError("unknown shape class '" + std::string(shape) + "'");
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cloud.points.push_back(sampler(rng));
  return cloud;
}

PointCloud gen_synthetic_shape(std::string_view shape, std::size_t n, Rng& rng) {
  if (n < 4) throw DomainError("gen_synthetic_shape: need at least 4 points");
  PointCloud cloud = sample_primitive(shape, n, rng);
  const Point3 scale{uniform(rng, 0.8, 1.2), uniform(rng, 0.8, 1.2), uniform(rng, 0.8, 1.2)};
  for (Point3& p : cloud.points) {
    for (std::size_t c = 0; c < 3; ++c) p[c] *= scale[c];
  }
  return normalize_unit_sphere(cloud);
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes < 2 || spec.num_classes > kShapes.size()) {
    throw ConfigError("synthetic classes must lie in [2, " + std::to_string(kShapes.size()) + "]");
  }
  if (spec.per_class == 0) throw ConfigError("per-class sample count must be positive");
  if (spec.num_points < 4) throw ConfigError("synthetic clouds need at least 4 points");
  Dataset ds;
  for (std::size_t c = 0; c < spec.num_classes; ++c) ds.class_names.emplace_back(kShapes[c]);
  ds.samples.reserve(spec.num_classes * spec.per_class);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t j = 0; j < spec.per_class; ++j) {
      const std::size_t index = c * spec.per_class + j;
      Rng rng(derive_seed(spec.seed, kSampleStream, index));
      LabeledSample s;
      s.cloud = quantize_f32(gen_synthetic_shape(kShapes[c], spec.num_points, rng));
      s.label = static_cast<std::uint32_t>(c);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace pointmask::data
