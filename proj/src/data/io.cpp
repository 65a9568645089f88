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

#include "data/io.hpp"

#include <charconv>
#include <cctype>
#include <string>

#include "core/binary_io.hpp"
#include "core/errors.hpp"
#include "data/shapes.hpp"

namespace pointmask::data {
namespace {

constexpr std::uint32_t kDims = 3;

void write_points(ByteWriter& w, const PointCloud& cloud) {
  for (const Point3& p : cloud.points) {
    for (double c : p) w.f32(static_cast<float>(c));
  }
}

PointCloud read_points(ByteReader& r, std::size_t n) {
  PointCloud cloud;
  cloud.points.resize(n);
  for (Point3& p : cloud.points) {
    for (double& c : p) c = static_cast<double>(r.f32());
  }
  return cloud;
}

}  // namespace

std::vector<std::string> default_class_names(std::size_t num_classes) {
  std::vector<std::string> names;
  const auto catalog = shape_catalog();
  for (std::size_t c = 0; c < num_classes; ++c) {
    names.push_back(num_classes <= catalog.size() ? std::string(catalog[c])
                                                  : "class_" + std::to_string(c));
  }
  return names;
}

std::vector<std::uint8_t> dataset_encode(const Dataset& dataset) {
  dataset.validate();
  const std::size_t common = dataset.num_points();
  const bool variable = common == 0 && !dataset.samples.empty();
  ByteWriter w;
  w.raw(std::string_view(kDatasetMagic, 4));
  w.u32(variable ? 2 : 1);
  w.u32(static_cast<std::uint32_t>(dataset.samples.size()));
  w.u32(static_cast<std::uint32_t>(common));
  w.u32(kDims);
  w.u32(static_cast<std::uint32_t>(dataset.num_classes()));
  for (const LabeledSample& s : dataset.samples) {
    if (variable) w.u32(static_cast<std::uint32_t>(s.cloud.size()));
    w.u32(s.label);
    write_points(w, s.cloud);
  }
  return w.bytes();
}

Dataset dataset_decode(std::vector<std::uint8_t> bytes) {
  ByteReader r(std::move(bytes));
  if (r.size() < 4 || r.raw(4) != std::string_view(kDatasetMagic, 4)) {
    throw FormatError("bad magic: not a PMDS dataset");
  }
  const std::uint32_t version = r.u32();
  if (version != 1 && version != 2) {
    throw FormatError("unsupported PMDS version " + std::to_string(version));
  }
  const std::uint32_t num_samples = r.u32();
  const std::uint32_t num_points = r.u32();
  const std::uint32_t dims = r.u32();
  const std::uint32_t num_classes = r.u32();
  if (dims != kDims) throw FormatError("PMDS dims must be 3, got " + std::to_string(dims));
  if (version == 1) {
    const std::uint64_t expected =
        static_cast<std::uint64_t>(num_samples) * (4 + std::uint64_t{num_points} * kDims * 4);
    if (r.remaining() != expected) {
      throw FormatError("payload of " + std::to_string(r.remaining()) + " bytes does not match " +
                        std::to_string(num_samples) + " samples of " +
                        std::to_string(num_points) + " points");
    }
  }
  Dataset ds;
  ds.class_names = default_class_names(num_classes);
  ds.samples.reserve(num_samples);
  for (std::uint32_t i = 0; i < num_samples; ++i) {
    const std::uint32_t n = version == 2 ? r.u32() : num_points;
    LabeledSample s;
    s.label = r.u32();
    if (s.label >= num_classes) {
      throw FormatError("sample " + std::to_string(i) + " label " + std::to_string(s.label) +
                        " exceeds class count " + std::to_string(num_classes));
    }
    if (r.remaining() < std::uint64_t{n} * kDims * 4) {
      throw FormatError("truncated payload in sample " + std::to_string(i));
    }
    s.cloud = read_points(r, n);
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after the last sample");
  return ds;
}

void dataset_save(const Dataset& dataset, const std::string& path) {
  write_file_bytes(path, dataset_encode(dataset));
}

Dataset dataset_load(const std::string& path) { return dataset_decode(read_file_bytes(path)); }

PointCloud xyz_parse(std::string_view text) {
  PointCloud cloud;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Point3 p{};
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (count >= 3) throw ParseError(line_no, "more than three values on a point line");
      const char* first = line.data() + i;
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, line.data() + j, p[count]);
      if (ec != std::errc() || ptr != line.data() + j) {
        throw ParseError(line_no, "expected a number, got '" + std::string(line.substr(i, j - i)) + "'");
      }
      ++count;
      i = j;
    }
    if (count == 0) continue;
    if (count != 3) throw ParseError(line_no, "point line needs three values");
    cloud.points.push_back(p);
  }
  return cloud;
}

std::string xyz_serialize(const PointCloud& cloud) {
  std::string out;
  char buf[64];
  for (const Point3& p : cloud.points) {
    for (std::size_t c = 0; c < 3; ++c) {
      auto res = std::to_chars(buf, buf + sizeof(buf), p[c]);
      out.append(buf, res.ptr);
      out.push_back(c == 2 ? '\n' : ' ');
    }
  }
  return out;
}

}  // namespace pointmask::data
