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

#ifndef POINTMASK_DATA_BIAS_HPP_
#define POINTMASK_DATA_BIAS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "data/point_cloud.hpp"

// Class-correlated shortcut patterns. Each class owns a planar letter glyph
// placed tangent to the sphere of radius kAnchorRadius, so every pattern
// point lies outside the unit ball that holds the normalized objects.
namespace pointmask::data {

using Point2 = std::array<double, 2>;

/// Polyline strokes in the square [-1, 1]^2.
struct Glyph {
  char letter = '?';
  std::vector<std::vector<Point2>> strokes;

  double length() const;
  /// Point at arc length fraction s in [0, 1) along the concatenated strokes.
  Point2 at(double s) const;
};

/// Letter glyphs in class-index order.
const std::vector<Glyph>& glyph_alphabet();

inline constexpr double kAnchorRadius = 1.5;
inline constexpr double kGlyphHalfSize = 0.3;

enum class BiasMode {
  kAppend,   // cloud grows to n + k points
  kReplace,  // last k points are overwritten, n is preserved
};

BiasMode parse_bias_mode(std::string_view name);

struct BiasSpec {
  std::size_t points_per_class = 0;  // k; zero disables the bias
  std::vector<Point3> anchors;       // one per class, norm kAnchorRadius
  std::vector<std::size_t> glyphs;   // index into glyph_alphabet(), per class
  std::uint64_t seed = 0;            // pattern stream, keyed by class
  BiasMode mode = BiasMode::kAppend;

  std::size_t num_classes() const { return anchors.size(); }
};

/// Distinct anchors and glyphs for `num_classes` classes.
BiasSpec make_bias_spec(std::size_t num_classes, std::size_t points_per_class,
                        std::uint64_t seed, BiasMode mode = BiasMode::kAppend);

/// The k-point block of a class. A pure function of (spec, label).
std::vector<Point3> bias_pattern(const BiasSpec& spec, std::uint32_t label);

/// Adds the class pattern to a sample; the original points are untouched in
/// append mode.
LabeledSample inject_bias(const LabeledSample& sample, const BiasSpec& spec);
Dataset inject_bias(const Dataset& dataset, const BiasSpec& spec);

}  // namespace pointmask::data

#endif  // POINTMASK_DATA_BIAS_HPP_
