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

#include "data/bias.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace pointmask::data {
namespace {

constexpr std::uint64_t kPatternStream = 0x42494153ULL;

double segment_length(const Point2& a, const Point2& b) {
  return std::hypot(b[0] - a[0], b[1] - a[1]);
}

std::vector<Glyph> build_alphabet() {
  using S = std::vector<Point2>;
  return {
      {'I', {S{{0, -1}, {0, 1}}, S{{-0.4, 1}, {0.4, 1}}, S{{-0.4, -1}, {0.4, -1}}}},
      {'L', {S{{-0.6, 1}, {-0.6, -1}, {0.6, -1}}}},
      {'T', {S{{-0.7, 1}, {0.7, 1}}, S{{0, 1}, {0, -1}}}},
      {'V', {S{{-0.7, 1}, {0, -1}, {0.7, 1}}}},
      {'X', {S{{-0.7, -1}, {0.7, 1}}, S{{-0.7, 1}, {0.7, -1}}}},
      {'Z', {S{{-0.7, 1}, {0.7, 1}, {-0.7, -1}, {0.7, -1}}}},
      {'N', {S{{-0.7, -1}, {-0.7, 1}, {0.7, -1}, {0.7, 1}}}},
      {'E', {S{{0.6, 1}, {-0.6, 1}, {-0.6, -1}, {0.6, -1}}, S{{-0.6, 0}, {0.4, 0}}}},
      {'H', {S{{-0.6, -1}, {-0.6, 1}}, S{{0.6, -1}, {0.6, 1}}, S{{-0.6, 0}, {0.6, 0}}}},
      {'K', {S{{-0.6, -1}, {-0.6, 1}}, S{{0.6, 1}, {-0.6, 0}, {0.6, -1}}}},
      {'A', {S{{-0.7, -1}, {0, 1}, {0.7, -1}}, S{{-0.35, 0}, {0.35, 0}}}},
      {'M', {S{{-0.7, -1}, {-0.7, 1}, {0, 0}, {0.7, 1}, {0.7, -1}}}},
  };
}

// Fibonacci lattice directions; fixed, so anchors never depend on the seed.
Point3 anchor_direction(std::size_t index, std::size_t count) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double y = 1.0 - 2.0 * (static_cast<double>(index) + 0.5) / static_cast<double>(count);
  const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
  const double phi = golden * static_cast<double>(index);
  return {r * std::cos(phi), y, r * std::sin(phi)};
}

}  // namespace

double Glyph::length() const {
  double total = 0.0;
  for (const auto& stroke : strokes) {
    for (std::size_t i = 1; i < stroke.size(); ++i) total += segment_length(stroke[i - 1], stroke[i]);
  }
  return total;
}

Point2 Glyph::at(double s) const {
  double remaining = std::clamp(s, 0.0, 1.0) * length();
  for (const auto& stroke : strokes) {
    for (std::size_t i = 1; i < stroke.size(); ++i) {
      const double seg = segment_length(stroke[i - 1], stroke[i]);
      if (remaining <= seg) {
        const double f = seg > 0.0 ? remaining / seg : 0.0;
        return {stroke[i - 1][0] + f * (stroke[i][0] - stroke[i - 1][0]),
                stroke[i - 1][1] + f * (stroke[i][1] - stroke[i - 1][1])};
      }
      remaining -= seg;
    }
  }
  return strokes.back().back();
}

const std::vector<Glyph>& glyph_alphabet() {
  static const std::vector<Glyph> alphabet = build_alphabet();
  return alphabet;
}

BiasMode parse_bias_mode(std::string_view name) {
  if (name == "append") return BiasMode::kAppend;
  if (name == "replace") return BiasMode::kReplace;
  throw ConfigError("unknown bias mode '" + std::string(name) + "' (expected append|replace)");
}

BiasSpec make_bias_spec(std::size_t num_classes, std::size_t points_per_class,
                        std::uint64_t seed, BiasMode mode) {
  const std::size_t capacity = glyph_alphabet().size();
  if (num_classes == 0 || num_classes > capacity) {
    throw ConfigError("bias patterns support 1.." + std::to_string(capacity) + " classes");
  }
  BiasSpec spec;
  spec.points_per_class = points_per_class;
  spec.seed = seed;
  spec.mode = mode;
  for (std::size_t c = 0; c < num_classes; ++c) {
    spec.anchors.push_back(kAnchorRadius * anchor_direction(c, capacity));
    spec.glyphs.push_back(c);
  }
  return spec;
}

std::vector<Point3> bias_pattern(const BiasSpec& spec, std::uint32_t label) {
  if (label >= spec.num_classes()) {
    throw ConfigError("bias spec has no pattern for class " + std::to_string(label));
  }
  const std::size_t k = spec.points_per_class;
  std::vector<Point3> block;
  if (k == 0) return block;
  const Point3& anchor = spec.anchors[label];
  const Glyph& glyph = glyph_alphabet().at(spec.glyphs[label]);
  // Tangent-plane basis at the anchor.
  const Point3 dir = (1.0 / norm(anchor)) * anchor;
  Point3 up{0.0, 1.0, 0.0};
  if (std::abs(dir[1]) > 0.9) up = {1.0, 0.0, 0.0};
  Point3 e1 = cross(up, dir);
  e1 = (1.0 / norm(e1)) * e1;
  const Point3 e2 = cross(dir, e1);

  Rng rng(derive_seed(spec.seed, kPatternStream, label));
  block.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Point2 g = glyph.at(uniform(rng, 0.0, 1.0));
    block.push_back(anchor + (kGlyphHalfSize * g[0]) * e1 + (kGlyphHalfSize * g[1]) * e2);
  }
  return block;
}

LabeledSample inject_bias(const LabeledSample& sample, const BiasSpec& spec) {
  if (sample.label >= spec.num_classes()) {
    throw ConfigError("bias spec has no pattern for class " + std::to_string(sample.label));
  }
  LabeledSample out = sample;
  const std::vector<Point3> block = quantize_f32(PointCloud{bias_pattern(spec, sample.label)}).points;
  if (block.empty()) return out;
  if (spec.mode == BiasMode::kAppend) {
    out.cloud.points.insert(out.cloud.points.end(), block.begin(), block.end());
  } else {
    if (block.size() > out.cloud.size()) {
      throw ConfigError("replace-mode bias of " + std::to_string(block.size()) +
                        " points exceeds cloud of " + std::to_string(out.cloud.size()));
    }
    std::copy(block.begin(), block.end(), out.cloud.points.end() - static_cast<std::ptrdiff_t>(block.size()));
  }
  return out;
}

Dataset inject_bias(const Dataset& dataset, const BiasSpec& spec) {
  Dataset out;
  out.class_names = dataset.class_names;
  out.samples.reserve(dataset.samples.size());
  for (const LabeledSample& s : dataset.samples) out.samples.push_back(inject_bias(s, spec));
  return out;
}

}  // namespace pointmask::data
