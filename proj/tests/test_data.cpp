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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "data/augment.hpp"
#include "data/bias.hpp"
#include "data/io.hpp"
#include "data/mesh.hpp"
#include "data/point_cloud.hpp"
#include "data/shapes.hpp"

namespace pointmask::data {
namespace {

double max_norm(const PointCloud& c) {
  double m = 0.0;
  for (const auto& p : c.points) m = std::max(m, norm(p));
  return m;
}

PointCloud random_cloud(std::size_t n, Rng& rng) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({uniform(rng, -2, 2), uniform(rng, -1, 3), uniform(rng, -0.5, 0.5)});
  }
  return c;
}

TEST(Shapes, SphereOnUnitRadius) {
  Rng rng(1);
  for (const auto& p : sample_primitive("sphere", 500, rng).points) EXPECT_NEAR(norm(p), 1.0, 1e-9);
}

TEST(Shapes, CubeOnFaces) {
  Rng rng(2);
  for (const auto& p : sample_primitive("cube", 500, rng).points) {
    const double m = std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
    EXPECT_NEAR(m, 1.0, 1e-9);
  }
}

TEST(Shapes, SameSeedSameCloud) {
  for (auto name : shape_catalog()) {
    Rng a(3), b(3);
    EXPECT_EQ(gen_synthetic_shape(name, 64, a), gen_synthetic_shape(name, 64, b)) << name;
  }
}

TEST(Shapes, GeneratedCloudsAreNormalized) {
  Rng rng(4);
  for (auto name : shape_catalog()) {
    const PointCloud c = gen_synthetic_shape(name, 128, rng);
    EXPECT_EQ(c.size(), 128u);
    EXPECT_NEAR(max_norm(c), 1.0, 1e-9) << name;
  }
}

TEST(Shapes, Errors) {
  Rng rng(5);
  EXPECT_THROW(sample_primitive("teapot", 10, rng), ConfigError);
  EXPECT_THROW(gen_synthetic_shape("cube", 3, rng), Error);
}

TEST(Shapes, DatasetLayout) {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.per_class = 4;
  spec.num_points = 32;
  spec.seed = 9;
  const Dataset d = generate_synthetic(spec);
  ASSERT_EQ(d.samples.size(), 12u);
  EXPECT_EQ(d.num_classes(), 3u);
  EXPECT_EQ(d.num_points(), 32u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(d.samples[i].label, i / 4);
  EXPECT_EQ(generate_synthetic(spec).samples, d.samples);
  spec.seed = 10;
  EXPECT_NE(generate_synthetic(spec).samples, d.samples);
}

TEST(Normalize, Idempotent) {
  Rng rng(6);
  const PointCloud once = normalize_unit_sphere(random_cloud(50, rng));
  const PointCloud twice = normalize_unit_sphere(once);
  for (std::size_t i = 0; i < once.size(); ++i) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(twice.points[i][c], once.points[i][c], 1e-9);
  }
}

TEST(Normalize, TwoPoints) {
  const PointCloud c = normalize_unit_sphere(PointCloud{{{0, 0, 0}, {2, 0, 0}}});
  EXPECT_EQ(c.points[0], (Point3{-1, 0, 0}));
  EXPECT_EQ(c.points[1], (Point3{1, 0, 0}));
}

TEST(Normalize, MaxNormOne) {
  Rng rng(7);
  EXPECT_NEAR(max_norm(normalize_unit_sphere(random_cloud(77, rng))), 1.0, 1e-9);
}

TEST(Normalize, DegenerateCloud) {
  EXPECT_THROW(normalize_unit_sphere(PointCloud{}), Error);
  const PointCloud same{{{1, 1, 1}, {1, 1, 1}}};
  EXPECT_THROW(normalize_unit_sphere(same), DomainError);
}

TEST(PadCyclic, RepeatsInOrder) {
  const PointCloud c{{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}}};
  const PointCloud p = pad_cyclic(c, 7);
  ASSERT_EQ(p.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(p.points[i], c.points[i % 3]);
}

TEST(Bias, ZeroPointsIsIdentity) {
  Rng rng(8);
  const LabeledSample s{normalize_unit_sphere(random_cloud(20, rng)), 1};
  EXPECT_EQ(inject_bias(s, make_bias_spec(3, 0, 1)), s);
}

TEST(Bias, SinglePointAtAnchorGlyph) {
  Rng rng(9);
  const LabeledSample s{normalize_unit_sphere(random_cloud(20, rng)), 2};
  const BiasSpec spec = make_bias_spec(3, 1, 1);
  const LabeledSample b = inject_bias(s, spec);
  ASSERT_EQ(b.cloud.size(), 21u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(b.cloud.points[i], s.cloud.points[i]);
  const Point3 extra = b.cloud.points[20];
  const Point3 expected = bias_pattern(spec, 2)[0];
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(extra[c], expected[c], 1e-6);
  EXPECT_LE(norm(extra - spec.anchors[2]), kGlyphHalfSize * std::sqrt(2.0) + 1e-12);
  EXPECT_GT(norm(extra), 1.0);
}

TEST(Bias, ConstantBlockPerClass) {
  Rng rng(10);
  const BiasSpec spec = make_bias_spec(4, 256, 3);
  const LabeledSample a{normalize_unit_sphere(random_cloud(30, rng)), 1};
  const LabeledSample b{normalize_unit_sphere(random_cloud(30, rng)), 1};
  const LabeledSample ba = inject_bias(a, spec), bb = inject_bias(b, spec);
  ASSERT_EQ(ba.cloud.size(), 286u);
  for (std::size_t i = 30; i < 286; ++i) {
    EXPECT_EQ(ba.cloud.points[i], bb.cloud.points[i]);
    EXPECT_GT(norm(ba.cloud.points[i]), 1.0);
  }
  EXPECT_NE(bias_pattern(spec, 0), bias_pattern(spec, 1));
}

TEST(Bias, ReplaceModeKeepsSize) {
  Rng rng(11);
  const LabeledSample s{normalize_unit_sphere(random_cloud(40, rng)), 0};
  const BiasSpec spec = make_bias_spec(2, 10, 3, BiasMode::kReplace);
  const LabeledSample b = inject_bias(s, spec);
  ASSERT_EQ(b.cloud.size(), 40u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(b.cloud.points[i], s.cloud.points[i]);
  for (std::size_t i = 30; i < 40; ++i) EXPECT_GT(norm(b.cloud.points[i]), 1.0);
}

TEST(Bias, AnchorsOutsideUnitSphere) {
  const BiasSpec spec = make_bias_spec(8, 5, 0);
  for (std::size_t c = 0; c < 8; ++c) {
    EXPECT_NEAR(norm(spec.anchors[c]), kAnchorRadius, 1e-12);
    for (const auto& p : bias_pattern(spec, static_cast<std::uint32_t>(c))) EXPECT_GT(norm(p), 1.0);
  }
  EXPECT_THROW(parse_bias_mode("sideways"), Error);
}

TEST(Jitter, VanishingSigmaIsIdentity) {
  Rng rng(12);
  const PointCloud c = random_cloud(30, rng);
  const PointCloud j = jitter(c, 1e-14, kJitterClip, rng);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(j.points[i][k], c.points[i][k], 1e-12);
  }
  EXPECT_THROW(jitter(c, 0.0, kJitterClip, rng), DomainError);
}

TEST(Jitter, ClippedStatistics) {
  Rng rng(13);
  PointCloud c;
  c.points.assign(333334, Point3{0.2, -0.1, 0.4});
  const PointCloud j = jitter(c, kJitterSigma, kJitterClip, rng);
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double d = j.points[i][k] - c.points[i][k];
      ASSERT_LE(std::abs(d), kJitterClip + 1e-15);
      ss += d * d;
      ++n;
    }
  }
  // The 5-sigma clip removes a fraction of the variance far below one standard error.
  const double sd = std::sqrt(ss / static_cast<double>(n));
  EXPECT_LT(std::abs(sd - kJitterSigma), 4.0 * kJitterSigma / std::sqrt(2.0 * n));
}

TEST(Rotation, Basics) {
  const PointCloud c{{{1, 0, 0}}};
  EXPECT_EQ(apply_rotation(c, rotation_z(0.0)), c);
  const Point3 r = apply_rotation(c, rotation_z(std::numbers::pi / 2)).points[0];
  EXPECT_NEAR(r[0], 0.0, 1e-15);
  EXPECT_NEAR(r[1], 1.0, 1e-15);
  EXPECT_NEAR(r[2], 0.0, 1e-15);
}

TEST(Rotation, RandomRotationsPreserveNorms) {
  Rng rng(14);
  const PointCloud c = random_cloud(100, rng);
  for (RotationMode mode : {RotationMode::kSingleAxis, RotationMode::kThreeAxis}) {
    const PointCloud r = rotate(c, mode, rng);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(norm(r.points[i]), norm(c.points[i]), 1e-12);
  }
}

TEST(Rotation, SingleAxisKeepsUpCoordinate) {
  Rng rng(15);
  const PointCloud c = random_cloud(20, rng);
  const PointCloud r = rotate(c, RotationMode::kSingleAxis, rng);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(r.points[i][1], c.points[i][1], 1e-12);
}

TEST(Augmentation, Names) {
  for (Augmentation a : {Augmentation::kNone, Augmentation::kJitter, Augmentation::kJitterRot1,
                         Augmentation::kJitterRot3}) {
    EXPECT_EQ(parse_augmentation(augmentation_name(a)), a);
  }
  EXPECT_THROW(parse_augmentation("wiggle"), Error);
}

// OFF conformance corpus.
TEST(Off, MinimalTriangle) {
  const Mesh m = off_parse("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_EQ(m.vertices.size(), 3u);
  ASSERT_EQ(m.faces.size(), 1u);
  EXPECT_EQ(m.faces[0], (Triangle{0, 1, 2}));
}

TEST(Off, QuadFan) {
  const Mesh m = off_parse("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  ASSERT_EQ(m.faces.size(), 2u);
  EXPECT_EQ(m.faces[0], (Triangle{0, 1, 2}));
  EXPECT_EQ(m.faces[1], (Triangle{0, 2, 3}));
}

TEST(Off, AcceptedVariants) {
  // Counts on the header line, comments, blank lines, CRLF endings and
  // trailing face colors.
  const Mesh a = off_parse("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  const Mesh b = off_parse("OFF\r\n# comment\n\n3 1 0\r\n0 0 0\n1 0 0 \n0 1 0\n3 0 1 2 255 0 0\n");
  const Mesh c = off_parse("OFF\n5 1 0\n0 0 0\n1 0 0\n1 1 0\n0.5 2 0\n0 1 0\n5 0 1 2 3 4\n");
  EXPECT_EQ(a.faces.size(), 1u);
  EXPECT_EQ(b.faces.size(), 1u);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(c.faces.size(), 3u);
}

TEST(Off, SerializeRoundTrip) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0.25, 0}, {0, 1, -3.5}, {0.125, 0.5, 1}};
  m.faces = {{0, 1, 2}, {0, 2, 3}, {1, 3, 2}};
  EXPECT_EQ(off_parse(off_serialize(m)), m);
}

struct MalformedOff {
  const char* name;
  const char* text;
  std::size_t line;
};

class OffRejects : public ::testing::TestWithParam<MalformedOff> {};

TEST_P(OffRejects, NamesTheLine) {
  const MalformedOff& c = GetParam();
  try {
    off_parse(c.text);
    FAIL() << c.name << " was accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), c.line) << c.name << ": " << e.what();
    EXPECT_NE(std::string(e.what()).find(std::to_string(c.line)), std::string::npos) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Corpus, OffRejects,
    ::testing::Values(
        MalformedOff{"empty", "", 1},
        MalformedOff{"no_header", "PLY\n3 1 0\n", 1},
        MalformedOff{"index_out_of_range", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n", 6},
        MalformedOff{"negative_index", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 -1 2\n", 6},
        MalformedOff{"bad_number", "OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n", 4},
        MalformedOff{"short_vertex", "OFF\n3 1 0\n0 0 0\n1 0\n0 1 0\n3 0 1 2\n", 4},
        MalformedOff{"two_vertex_face", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n2 0 1\n", 6},
        MalformedOff{"face_too_short", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2\n", 7},
        MalformedOff{"missing_faces", "OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", 7},
        MalformedOff{"missing_vertices", "OFF\n3 1 0\n0 0 0\n1 0 0\n", 5},
        MalformedOff{"bad_counts", "OFF\n3\n", 2}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(MeshSampling, SingleTriangleBarycentric) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  Rng rng(16);
  for (const auto& p : sample_mesh_surface(m, 2000, rng).points) {
    EXPECT_GE(p[0], 0.0);
    EXPECT_GE(p[1], 0.0);
    EXPECT_LE(p[0] + p[1], 1.0 + 1e-12);
    EXPECT_EQ(p[2], 0.0);
  }
  EXPECT_EQ(triangle_area(m.vertices[0], m.vertices[1], m.vertices[2]), 0.5);
}

TEST(MeshSampling, AreaWeightedSelection) {
  Mesh m;
  m.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {10, 0, 0}, {16, 0, 0}, {10, 1, 0}};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  Rng rng(17);
  const std::size_t n = 100000;
  std::size_t small = 0;
  for (const auto& p : sample_mesh_surface(m, n, rng).points) small += p[0] < 5.0;
  const double p = 0.25;
  const double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_LT(std::abs(static_cast<double>(small) - n * p), 4.0 * sigma);
}

TEST(MeshSampling, PickWeightedBoundaries) {
  const std::vector<double> cum{0.25, 1.0};
  EXPECT_EQ(pick_weighted(cum, 0.0), 0u);
  EXPECT_EQ(pick_weighted(cum, 0.2499), 0u);
  EXPECT_EQ(pick_weighted(cum, 0.25), 1u);
  EXPECT_EQ(pick_weighted(cum, 0.9999), 1u);
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("pm_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

TEST(Pmds, RoundTripIsExact) {
  SyntheticSpec spec;
  spec.num_classes = 4;
  spec.per_class = 3;
  spec.num_points = 40;
  spec.seed = 5;
  const Dataset d = generate_synthetic(spec);
  TempDir dir;
  dataset_save(d, dir.file("d.pmds"));
  const Dataset e = dataset_load(dir.file("d.pmds"));
  EXPECT_EQ(e.samples, d.samples);
  EXPECT_EQ(e.num_classes(), d.num_classes());
  EXPECT_EQ(dataset_encode(e), dataset_encode(d));
}

TEST(Pmds, VariableSizeRoundTrip) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.per_class = 2;
  spec.num_points = 16;
  Dataset d = generate_synthetic(spec);
  d.samples[1].cloud.points.resize(9);
  const Dataset e = dataset_decode(dataset_encode(d));
  EXPECT_EQ(e.samples, d.samples);
  EXPECT_EQ(e.num_points(), 0u);
}

TEST(Pmds, Rejections) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.per_class = 2;
  spec.num_points = 8;
  const std::vector<std::uint8_t> good = dataset_encode(generate_synthetic(spec));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(dataset_decode(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[4] = 9;
  EXPECT_THROW(dataset_decode(bad_version), FormatError);

  auto more_samples = good;
  more_samples[8] += 1;  // num_samples, little-endian
  EXPECT_THROW(dataset_decode(more_samples), FormatError);

  auto fewer_samples = good;
  fewer_samples[8] -= 1;
  EXPECT_THROW(dataset_decode(fewer_samples), FormatError);

  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(dataset_decode(truncated), FormatError);

  EXPECT_THROW(dataset_load("/nonexistent/dir/x.pmds"), IoError);
}

TEST(Xyz, ParseAndSerialize) {
  const PointCloud c = xyz_parse("# header\n1 2 3\n\n-0.5 0.25 4e-3\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], (Point3{-0.5, 0.25, 4e-3}));
  EXPECT_EQ(xyz_parse(xyz_serialize(c)), c);
}

TEST(Xyz, Errors) {
  try {
    xyz_parse("1 2 3\n4 5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(xyz_parse("1 2 3 4\n"), ParseError);
  EXPECT_THROW(xyz_parse("1 b 3\n"), ParseError);
}

}  // namespace
}  // namespace pointmask::data
