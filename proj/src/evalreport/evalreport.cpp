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

#include "evalreport/evalreport.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "core/errors.hpp"
#include "diffcore/ops.hpp"
#include "mask/mask.hpp"

namespace pointmask::eval {

using ad::Tensor;

namespace {

bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::size_t label_rank(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) throw IndexError("label outside the logit vector");
  std::size_t rank = 0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (logits[c] > logits[label] || (logits[c] == logits[label] && c < label)) ++rank;
  }
  return rank;
}

Metrics evaluate(const train::ModelParams& model, const data::Dataset& dataset,
                 std::span<const std::size_t> top_n) {
  const std::size_t c = model.num_classes();
  if (dataset.num_classes() != c) {
    throw ContractError("model has " + std::to_string(c) + " classes, dataset has " +
                        std::to_string(dataset.num_classes()));
  }
  dataset.validate();
  for (std::size_t n : top_n) {
    if (n == 0) throw ConfigError("top-n values must be at least 1");
  }
  std::vector<data::PointCloud> clouds;
  clouds.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) clouds.push_back(s.cloud);
  const auto logits = train::predict_logits(model, clouds);

  Metrics m;
  m.num_samples = dataset.samples.size();
  m.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::map<std::size_t, std::size_t> hits;
  for (std::size_t n : top_n) hits[n] = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const std::size_t label = dataset.samples[i].label;
    const std::size_t rank = label_rank(logits[i].values(), label);
    ++m.confusion[label][train::argmax(logits[i].values())];
    if (rank == 0) ++m.correct;
    for (auto& [n, h] : hits) {
      if (rank < n) ++h;
    }
  }
  const auto total = static_cast<double>(m.num_samples);
  m.overall_accuracy = m.num_samples ? static_cast<double>(m.correct) / total : 0.0;
  for (const auto& [n, h] : hits) m.top_n[n] = m.num_samples ? static_cast<double>(h) / total : 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < c; ++p) row += m.confusion[k][p];
    m.per_class_accuracy.push_back(row ? static_cast<double>(m.confusion[k][k]) /
                                             static_cast<double>(row)
                                       : std::numeric_limits<double>::quiet_NaN());
  }
  return m;
}

std::size_t AttributionRecord::survivors() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                [](double v) { return v > 0.0; }));
}

std::vector<AttributionRecord> attribute(const train::ModelParams& model,
                                         const data::PointCloud& cloud,
                                         std::span<const double> thresholds) {
  if (model.mask.variant != mask::Variant::kPointMask || !model.head) {
    throw VariantError("attribution needs a pointmask model, got " +
                       std::string(mask::variant_name(model.mask.variant)));
  }
  for (double t : thresholds) {
    if (!(t >= 0.0 && t < 1.0)) throw DomainError("thresholds must lie in [0, 1)");
  }
  const data::PointCloud input = train::fit_to_model(model, cloud);
  const Tensor points = data::to_tensor(input);
  const std::size_t n = input.size();

  std::vector<double> j(n);
  {
    ad::Tape tape;
    nn::Binder bind(tape, false);
    const std::size_t offsets[] = {0, n};
    // With eps = 0 the sample J equals mu.
    mask::Gaussian g = mask::mask_head_forward(bind, *model.head, tape.constant(points), offsets,
                                               nn::Mode::kEval);
    std::copy(g.mu.value().values().begin(), g.mu.value().values().end(), j.begin());
  }

  std::vector<AttributionRecord> out;
  for (double t : thresholds) {
    AttributionRecord r;
    r.points = input;
    r.threshold = t;
    r.mask.resize(n);
    Tensor masked = points;
    for (std::size_t i = 0; i < n; ++i) {
      r.mask[i] = mask::mask_relu(j[i], t);
      for (std::size_t k = 0; k < 3; ++k) masked.at(i, k) *= r.mask[i];
    }
    const Tensor logits = nn::classify(model.classifier, masked);
    r.predicted = train::argmax(logits.values());
    double mx = logits[r.predicted], z = 0.0;
    for (double v : logits.values()) z += std::exp(v - mx);
    r.probability = 1.0 / z;
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string attribution_ply(const AttributionRecord& r) {
  if (r.mask.size() != r.points.size()) {
    throw ContractError("attribution record has mismatched mask and point counts");
  }
  std::string out =
      "ply\nformat ascii 1.0\ncomment threshold " + format_double(r.threshold) +
      "\ncomment predicted " + std::to_string(r.predicted) + " probability " +
      format_double(r.probability) + "\nelement vertex " + std::to_string(r.points.size()) +
      "\nproperty float x\nproperty float y\nproperty float z\nproperty float mask\nend_header\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points.points[i];
    const double row[4] = {p[0], p[1], p[2], r.mask[i]};
    for (std::size_t k = 0; k < 4; ++k) {
      out += format_double(static_cast<float>(row[k]));
      out.push_back(k == 3 ? '\n' : ' ');
    }
  }
  return out;
}

void export_attribution_ply(const AttributionRecord& record, const std::string& path) {
  write_text_file(path, attribution_ply(record));
}

AttributionRecord parse_attribution_ply(std::string_view text) {
  AttributionRecord r;
  std::size_t line_no = 0, pos = 0, vertices = 0;
  bool in_header = true, counted = false;
  std::vector<std::string> props;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = split_ws(line);
    if (in_header) {
      if (line_no == 1) {
        if (tok.size() != 1 || tok[0] != "ply") throw ParseError(line_no, "missing ply magic");
        continue;
      }
      if (tok.empty()) continue;
      if (tok[0] == "format" && (tok.size() < 2 || tok[1] != "ascii")) {
        throw ParseError(line_no, "only ascii PLY is supported");
      }
      if (tok[0] == "comment" && tok.size() == 3 && tok[1] == "threshold") {
        r.threshold = parse_double(tok[2], line_no);
      }
      if (tok[0] == "element" && tok.size() == 3 && tok[1] == "vertex") {
        vertices = static_cast<std::size_t>(parse_double(tok[2], line_no));
        counted = true;
      }
      if (tok[0] == "property" && tok.size() == 3) props.emplace_back(tok[2]);
      if (tok[0] == "end_header") in_header = false;
      continue;
    }
    if (tok.empty()) continue;
    if (tok.size() != props.size()) throw ParseError(line_no, "vertex row width mismatch");
    data::Point3 p{};
    double m = 0.0;
    for (std::size_t k = 0; k < tok.size(); ++k) {
      const double v = parse_double(tok[k], line_no);
      if (props[k] == "x") p[0] = v;
      if (props[k] == "y") p[1] = v;
      if (props[k] == "z") p[2] = v;
      if (props[k] == "mask") m = v;
    }
    r.points.points.push_back(p);
    r.mask.push_back(m);
  }
  if (in_header || !counted) throw ParseError(line_no, "incomplete PLY header");
  if (r.points.size() != vertices) {
    throw ParseError(line_no, "expected " + std::to_string(vertices) + " vertices, read " +
                                  std::to_string(r.points.size()));
  }
  return r;
}

std::string to_csv(const Table& table) {
  std::string out;
  auto row_out = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      append_field(out, row[i]);
    }
    out.push_back('\n');
  };
  row_out(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw ContractError("csv row width differs from header");
    row_out(row);
  }
  return out;
}

Table parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
      ++line;
    } else if (c != '\r') {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (any || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(1, "csv has no header row");
  Table t;
  t.header = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != t.header.size()) {
      throw ParseError(r + 1, "row width differs from header");
    }
    t.rows.push_back(std::move(rows[r]));
  }
  return t;
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path);
}

void export_csv(const Table& table, const std::string& path) {
  write_text_file(path, to_csv(table));
}

Table confusion_table(const Metrics& m, std::span<const std::string> names) {
  Table t;
  t.header.push_back("true\\predicted");
  for (std::size_t c = 0; c < m.confusion.size(); ++c) {
    t.header.push_back(c < names.size() ? names[c] : std::to_string(c));
  }
  for (std::size_t r = 0; r < m.confusion.size(); ++r) {
    std::vector<std::string> row{t.header[r + 1]};
    for (std::size_t v : m.confusion[r]) row.push_back(std::to_string(v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table per_class_table(const Metrics& m, std::span<const std::string> names) {
  Table t{{"class", "name", "samples", "accuracy"}, {}};
  for (std::size_t c = 0; c < m.per_class_accuracy.size(); ++c) {
    std::size_t n = 0;
    for (std::size_t v : m.confusion[c]) n += v;
    t.rows.push_back({std::to_string(c), c < names.size() ? names[c] : std::to_string(c),
                      std::to_string(n), format_double(m.per_class_accuracy[c])});
  }
  return t;
}

Table top_n_table(const Metrics& m) {
  Table t{{"n", "accuracy"}, {}};
  for (const auto& [n, v] : m.top_n) t.rows.push_back({std::to_string(n), format_double(v)});
  return t;
}

Table training_log_table(std::span<const train::EpochRecord> log) {
  Table t{{"epoch", "loss", "ce", "kl", "train_accuracy", "val_accuracy"}, {}};
  for (const auto& r : log) {
    t.rows.push_back({std::to_string(r.epoch), format_double(r.loss), format_double(r.ce),
                      format_double(r.kl), format_double(r.train_accuracy),
                      format_double(r.val_accuracy)});
  }
  return t;
}

std::string metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["samples"] = m.num_samples;
  j["correct"] = m.correct;
  j["overall_accuracy"] = m.overall_accuracy;
  nlohmann::ordered_json top = nlohmann::ordered_json::object();
  for (const auto& [n, v] : m.top_n) top[std::to_string(n)] = v;
  j["top_n"] = top;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (double v : m.per_class_accuracy) {
    per.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
  }
  j["per_class_accuracy"] = per;
  j["confusion"] = m.confusion;
  return j.dump(2);
}

}  // namespace pointmask::eval
