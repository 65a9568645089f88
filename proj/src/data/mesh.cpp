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

#include "data/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "core/errors.hpp"

namespace pointmask::data {
namespace {

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

// Splits into non-empty, non-comment lines of whitespace-separated tokens.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Line parsed{number, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) parsed.tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (!parsed.tokens.empty()) lines.push_back(std::move(parsed));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double parse_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

std::size_t parse_count(std::string_view token, std::size_t line) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

Mesh off_parse(std::string_view text) {
  const std::vector<Line> lines = tokenize(text);
  if (lines.empty()) throw ParseError(1, "empty input, expected OFF header");
  std::size_t cursor = 0;
  const Line& header = lines[cursor++];
  std::string_view magic = header.tokens.front();
  if (magic.substr(0, 3) != "OFF") {
    throw ParseError(header.number, "missing OFF header");
  }
  // Counts either share the header line or occupy the next one.
  std::vector<std::string_view> count_tokens;
  std::size_t count_line = header.number;
  if (magic.size() > 3) count_tokens.push_back(magic.substr(3));
  count_tokens.insert(count_tokens.end(), header.tokens.begin() + 1, header.tokens.end());
  if (count_tokens.empty()) {
    if (cursor >= lines.size()) throw ParseError(header.number + 1, "missing element counts");
    count_tokens = lines[cursor].tokens;
    count_line = lines[cursor].number;
    ++cursor;
  }
  if (count_tokens.size() < 2) throw ParseError(count_line, "malformed element counts");
  const std::size_t num_vertices = parse_count(count_tokens[0], count_line);
  const std::size_t num_faces = parse_count(count_tokens[1], count_line);
  if (count_tokens.size() > 2) parse_count(count_tokens[2], count_line);

  const std::size_t last_line = lines.empty() ? 1 : lines.back().number;
  Mesh mesh;
  mesh.vertices.reserve(num_vertices);
  for (std::size_t v = 0; v < num_vertices; ++v) {
    if (cursor >= lines.size()) {
      throw ParseError(last_line + 1, "expected " + std::to_string(num_vertices) +
                                          " vertices, found " + std::to_string(v));
    }
    const Line& line = lines[cursor++];
    if (line.tokens.size() < 3) throw ParseError(line.number, "vertex needs 3 coordinates");
    mesh.vertices.push_back({parse_double(line.tokens[0], line.number),
                             parse_double(line.tokens[1], line.number),
                             parse_double(line.tokens[2], line.number)});
  }
  for (std::size_t f = 0; f < num_faces; ++f) {
    if (cursor >= lines.size()) {
      throw ParseError(last_line + 1, "expected " + std::to_string(num_faces) +
                                          " faces, found " + std::to_string(f));
    }
    const Line& line = lines[cursor++];
    const std::size_t k = parse_count(line.tokens[0], line.number);
    if (k < 3) throw ParseError(line.number, "face needs at least 3 vertices");
    if (line.tokens.size() < k + 1) {
      throw ParseError(line.number, "face declares " + std::to_string(k) + " vertices but lists " +
                                        std::to_string(line.tokens.size() - 1));
    }
    std::vector<std::uint32_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t value = parse_count(line.tokens[i + 1], line.number);
      if (value >= num_vertices) {
        throw ParseError(line.number, "face index " + std::to_string(value) +
                                          " out of range for " + std::to_string(num_vertices) +
                                          " vertices");
      }
      idx[i] = static_cast<std::uint32_t>(value);
    }
    for (std::size_t i = 1; i + 1 < k; ++i) mesh.faces.push_back({idx[0], idx[i], idx[i + 1]});
  }
  return mesh;
}

Mesh off_read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return off_parse(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail() + " in " + path);
  }
}

std::string off_serialize(const Mesh& mesh) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Point3& v : mesh.vertices) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const Triangle& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  return out.str();
}

double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

std::size_t pick_weighted(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

PointCloud sample_mesh_surface(const Mesh& mesh, std::size_t n, Rng& rng) {
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const Triangle& f : mesh.faces) {
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw DomainError("sample_mesh_surface: mesh has zero surface area");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Triangle& f = mesh.faces[pick_weighted(cumulative, unit(rng))];
    double u = unit(rng);
    double v = unit(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Point3& a = mesh.vertices[f[0]];
    const Point3& b = mesh.vertices[f[1]];
    const Point3& c = mesh.vertices[f[2]];
    cloud.points.push_back(a + u * (b - a) + v * (c - a));
  }
  return cloud;
}

}  // namespace pointmask::data
