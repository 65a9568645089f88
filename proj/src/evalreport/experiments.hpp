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


#ifndef POINTMASK_EVALREPORT_EXPERIMENTS_HPP_
#define POINTMASK_EVALREPORT_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "data/bias.hpp"
#include "data/shapes.hpp"
#include "evalreport/evalreport.hpp"
#include "mask/mask.hpp"
#include "train/train.hpp"

namespace pointmask::eval {

using Progress = std::function<void(const std::string& line)>;

struct BiasExperimentConfig {
  std::vector<std::size_t> levels{0, 1, 50, 100, 256};
  std::vector<mask::Variant> variants{mask::Variant::kBaseline, mask::Variant::kRandMask,
                                      mask::Variant::kPointMask, mask::Variant::kPointMap};
  std::size_t num_classes = 6;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 30;
  std::size_t num_points = 256;
  data::BiasMode mode = data::BiasMode::kAppend;
  train::TrainConfig base = train::TrainConfig::desk();
  std::vector<double> thresholds{0.0, 0.25, 0.5, 0.75, 0.9};
  std::size_t attribution_samples = 1;  // biased test clouds per class exported as PLY
  std::uint64_t seed = 0;
};

struct BiasRow {
  std::size_t level = 0;
  mask::Variant variant = mask::Variant::kBaseline;
  double biased_accuracy = 0.0;
  double clean_accuracy = 0.0;
  std::uint32_t best_epoch = 0;
  double seconds = 0.0;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  double chance = 0.0;
  double clean_max_norm = 0.0;  // largest point norm over all bias-free test sets

  const BiasRow* find(std::size_t level, mask::Variant variant) const;
};

/// Trains every (level, variant) arm and scores it on a biased and a bias-free
/// test set. Writes config.json, CSVs, PLYs and summary.json to run_dir unless
/// it is empty.
BiasReport bias_experiment(const BiasExperimentConfig& config, const std::string& run_dir,
                           const Progress& progress = {});

/// Clean accuracy per level (rows) and variant (columns).
Table bias_figure_table(const BiasReport& report);
Table bias_results_table(const BiasReport& report);
std::string bias_summary_json(const BiasReport& report);

struct RotationExperimentConfig {
  std::vector<mask::Variant> variants{mask::Variant::kBaseline, mask::Variant::kPointMask};
  std::size_t num_classes = 6;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 30;
  std::size_t num_points = 256;
  train::TrainConfig base = train::TrainConfig::desk();
  std::vector<std::size_t> top_n{1, 2, 3, 5};
  bool aligned_baseline = true;  // also train and test the baseline without rotations
  std::uint64_t seed = 0;
};

struct RotationRow {
  mask::Variant variant = mask::Variant::kBaseline;
  bool dropout = true;
  bool rotated = true;
  Metrics metrics;
  std::uint32_t best_epoch = 0;
  double seconds = 0.0;
};

struct RotationReport {
  std::vector<RotationRow> rows;

  const RotationRow* find(mask::Variant variant, bool dropout, bool rotated) const;
};

/// Trains each variant with and without dropout under three-axis rotation
/// augmentation and evaluates on rotated test clouds.
RotationReport rotation_experiment(const RotationExperimentConfig& config,
                                   const std::string& run_dir, const Progress& progress = {});

Table rotation_grid_table(const RotationReport& report);
Table rotation_top_n_table(const RotationReport& report);
std::string rotation_summary_json(const RotationReport& report);

}  // namespace pointmask::eval

#endif  // POINTMASK_EVALREPORT_EXPERIMENTS_HPP_
