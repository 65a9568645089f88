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

#ifndef POINTMASK_EVALREPORT_EVALREPORT_HPP_
#define POINTMASK_EVALREPORT_EVALREPORT_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "data/point_cloud.hpp"
#include "train/train.hpp"

namespace pointmask::eval {

inline constexpr std::size_t kDefaultTopN[] = {1, 2, 3, 5};

struct Metrics {
  std::size_t num_samples = 0;
  std::size_t correct = 0;
  double overall_accuracy = 0.0;
  std::map<std::size_t, double> top_n;
  std::vector<double> per_class_accuracy;  // NaN for classes without samples
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

/// Deterministic evaluation: eps = 0, batch-norm running statistics, no
/// dropout and no augmentation. Throws ContractError on a class-count mismatch.
Metrics evaluate(const train::ModelParams& model, const data::Dataset& dataset,
                 std::span<const std::size_t> top_n = kDefaultTopN);

/// Zero-based rank of `label` when classes are ordered by descending logit,
/// ties broken by the lower class index.
std::size_t label_rank(std::span<const double> logits, std::size_t label);

struct AttributionRecord {
  data::PointCloud points;
  std::vector<double> mask;
  double threshold = 0.0;
  std::size_t predicted = 0;
  double probability = 0.0;

  std::size_t survivors() const;
};

/// One record per threshold with eps = 0. `points` is the cloud as the model
/// saw it, after fit_to_model. Throws VariantError for models without a
/// multiplicative mask.
std::vector<AttributionRecord> attribute(const train::ModelParams& model,
                                         const data::PointCloud& cloud,
                                         std::span<const double> thresholds);

/// ASCII PLY with vertex properties x, y, z and mask.
std::string attribution_ply(const AttributionRecord& record);
void export_attribution_ply(const AttributionRecord& record, const std::string& path);
/// Reads the vertices of an ASCII PLY written by attribution_ply.
AttributionRecord parse_attribution_ply(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal that reads back to the same double, independent of the
/// C locale.
std::string format_double(double v);

std::string to_csv(const Table& table);
Table parse_csv(std::string_view text);
void export_csv(const Table& table, const std::string& path);

Table confusion_table(const Metrics& metrics, std::span<const std::string> class_names);
Table per_class_table(const Metrics& metrics, std::span<const std::string> class_names);
Table top_n_table(const Metrics& metrics);
Table training_log_table(std::span<const train::EpochRecord> log);

std::string metrics_json(const Metrics& metrics);

void write_text_file(const std::string& path, std::string_view text);

}  // namespace pointmask::eval

#endif  // POINTMASK_EVALREPORT_EVALREPORT_HPP_
