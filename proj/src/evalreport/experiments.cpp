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


#include "evalreport/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <string_view>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "data/augment.hpp"
#include "json.hpp"

namespace pointmask::eval {
namespace {

constexpr std::uint64_t kTrainData = 0x74726461;
constexpr std::uint64_t kTestData = 0x74656461;
constexpr std::uint64_t kBiasStream = 0x62696173;
constexpr std::uint64_t kRotateStream = 0x726f7474;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void say(const Progress& progress, const std::string& line) {
  if (progress) progress(line);
}

std::string arm_name(std::string_view variant, std::string_view suffix) {
  return std::string(variant) + "_" + std::string(suffix);
}

double max_norm(const data::Dataset& ds) {
  double m = 0.0;
  for (const auto& s : ds.samples) {
    for (const auto& p : s.cloud.points) m = std::max(m, std::hypot(p[0], p[1], p[2]));
  }
  return m;
}

struct Arm {
  train::Checkpoint model;
  double seconds = 0.0;
};

Arm train_arm(const data::Dataset& ds, const train::TrainConfig& config) {
  const auto t0 = Clock::now();
  train::FitResult r = train::fit(ds, config);
  Arm arm{r.best ? std::move(*r.best) : std::move(r.final), 0.0};
  arm.seconds = seconds_since(t0);
  return arm;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

nlohmann::ordered_json config_json(const train::TrainConfig& c) {
  return nlohmann::ordered_json::parse(train::config_to_json(c));
}

}  // namespace

const BiasRow* BiasReport::find(std::size_t level, mask::Variant variant) const {
  for (const auto& r : rows) {
    if (r.level == level && r.variant == variant) return &r;
  }
  return nullptr;
}

BiasReport bias_experiment(const BiasExperimentConfig& config, const std::string& run_dir,
                           const Progress& progress) {
  if (config.levels.empty() || config.variants.empty()) {
    throw ConfigError("bias experiment needs at least one level and one variant");
  }
  config.base.validate();
  ensure_dir(run_dir);

  const data::Dataset train_clean = data::generate_synthetic(
      {config.num_classes, config.train_per_class, config.num_points,
       derive_seed(config.seed, kTrainData)});
  const data::Dataset test_clean = data::generate_synthetic(
      {config.num_classes, config.test_per_class, config.num_points,
       derive_seed(config.seed, kTestData)});

  BiasReport report;
  report.chance = 1.0 / static_cast<double>(config.num_classes);
  report.clean_max_norm = max_norm(test_clean);

  if (!run_dir.empty()) {
    nlohmann::ordered_json j;
    j["levels"] = config.levels;
    std::vector<std::string> names;
    for (auto v : config.variants) names.emplace_back(mask::variant_name(v));
    j["variants"] = names;
    j["num_classes"] = config.num_classes;
    j["train_per_class"] = config.train_per_class;
    j["test_per_class"] = config.test_per_class;
    j["num_points"] = config.num_points;
    j["bias_mode"] = config.mode == data::BiasMode::kAppend ? "append" : "replace";
    j["seed"] = config.seed;
    j["thresholds"] = config.thresholds;
    j["train"] = config_json(config.base);
    write_text_file(join(run_dir, "config.json"), j.dump(2) + "\n");
  }

  for (std::size_t level : config.levels) {
    const data::BiasSpec spec = data::make_bias_spec(
        config.num_classes, level, derive_seed(config.seed, kBiasStream), config.mode);
    const data::Dataset train_set = data::inject_bias(train_clean, spec);
    const data::Dataset test_biased = data::inject_bias(test_clean, spec);
    for (mask::Variant variant : config.variants) {
      train::TrainConfig tc = config.base;
      tc.mask.variant = variant;
      const std::string name = arm_name(mask::variant_name(variant), "k" + std::to_string(level));
      say(progress, "training " + name);
      Arm arm = train_arm(train_set, tc);
      BiasRow row;
      row.level = level;
      row.variant = variant;
      row.biased_accuracy = train::accuracy(arm.model.model, test_biased);
      row.clean_accuracy = train::accuracy(arm.model.model, test_clean);
      row.best_epoch = arm.model.best_epoch;
      row.seconds = arm.seconds;
      report.rows.push_back(row);
      say(progress, name + ": biased " + format_double(row.biased_accuracy) + " clean " +
                        format_double(row.clean_accuracy));

      if (run_dir.empty()) continue;
      export_csv(training_log_table(arm.model.log), join(run_dir, name + "_log.csv"));
      if (variant != mask::Variant::kPointMask) continue;
      for (std::size_t c = 0; c < config.num_classes; ++c) {
        std::size_t taken = 0;
        for (std::size_t i = 0; i < test_biased.samples.size() && taken < config.attribution_samples;
             ++i) {
          const auto& s = test_biased.samples[i];
          if (s.label != c) continue;
          const auto records = attribute(arm.model.model, s.cloud, config.thresholds);
          for (const auto& r : records) {
            export_attribution_ply(r, join(run_dir, name + "_s" + std::to_string(i) + "_t" +
                                                        format_double(r.threshold) + ".ply"));
          }
          ++taken;
        }
      }
    }
  }

  if (!run_dir.empty()) {
    export_csv(bias_results_table(report), join(run_dir, "bias_results.csv"));
    export_csv(bias_figure_table(report), join(run_dir, "bias_clean_accuracy.csv"));
    write_text_file(join(run_dir, "summary.json"), bias_summary_json(report) + "\n");
  }
  return report;
}

std::string bias_summary_json(const BiasReport& report) {
  nlohmann::ordered_json j;
  j["chance"] = report.chance;
  j["clean_test_max_norm"] = report.clean_max_norm;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"level", r.level},
                    {"variant", mask::variant_name(r.variant)},
                    {"biased_accuracy", r.biased_accuracy},
                    {"clean_accuracy", r.clean_accuracy},
                    {"best_epoch", r.best_epoch},
                    {"seconds", r.seconds}});
  }
  j["rows"] = rows;
  j["reference"] = {{"note", "published full-scale result, not reproduced at this scale"},
                    {"level", 256},
                    {"pointmask_clean_accuracy", 0.76},
                    {"randmask_clean_accuracy", 0.42}};
  return j.dump(2);
}

Table bias_results_table(const BiasReport& report) {
  Table t{{"level", "variant", "biased_accuracy", "clean_accuracy", "best_epoch", "seconds"}, {}};
  for (const auto& r : report.rows) {
    t.rows.push_back({std::to_string(r.level), std::string(mask::variant_name(r.variant)),
                      format_double(r.biased_accuracy), format_double(r.clean_accuracy),
                      std::to_string(r.best_epoch), format_double(r.seconds)});
  }
  return t;
}

Table bias_figure_table(const BiasReport& report) {
  std::vector<std::size_t> levels;
  std::vector<mask::Variant> variants;
  for (const auto& r : report.rows) {
    if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) {
      variants.push_back(r.variant);
    }
  }
  Table t;
  t.header.push_back("level");
  for (auto v : variants) t.header.emplace_back(mask::variant_name(v));
  t.header.push_back("chance");
  for (std::size_t level : levels) {
    std::vector<std::string> row{std::to_string(level)};
    for (auto v : variants) {
      const BiasRow* r = report.find(level, v);
      row.push_back(r ? format_double(r->clean_accuracy) : "");
    }
    row.push_back(format_double(report.chance));
    t.rows.push_back(std::move(row));
  }
  return t;
}

const RotationRow* RotationReport::find(mask::Variant variant, bool dropout, bool rotated) const {
  for (const auto& r : rows) {
    if (r.variant == variant && r.dropout == dropout && r.rotated == rotated) return &r;
  }
  return nullptr;
}

RotationReport rotation_experiment(const RotationExperimentConfig& config,
                                   const std::string& run_dir, const Progress& progress) {
  if (config.variants.empty()) throw ConfigError("rotation experiment needs a variant");
  config.base.validate();
  ensure_dir(run_dir);

  const data::Dataset train_set = data::generate_synthetic(
      {config.num_classes, config.train_per_class, config.num_points,
       derive_seed(config.seed, kTrainData)});
  const data::Dataset test_aligned = data::generate_synthetic(
      {config.num_classes, config.test_per_class, config.num_points,
       derive_seed(config.seed, kTestData)});
  data::Dataset test_rotated = test_aligned;
  for (std::size_t i = 0; i < test_rotated.samples.size(); ++i) {
    Rng rng(derive_seed(config.seed, kRotateStream, i));
    auto& cloud = test_rotated.samples[i].cloud;
    cloud = data::rotate(cloud, data::RotationMode::kThreeAxis, rng);
  }

  if (!run_dir.empty()) {
    nlohmann::ordered_json j;
    std::vector<std::string> names;
    for (auto v : config.variants) names.emplace_back(mask::variant_name(v));
    j["variants"] = names;
    j["num_classes"] = config.num_classes;
    j["train_per_class"] = config.train_per_class;
    j["test_per_class"] = config.test_per_class;
    j["num_points"] = config.num_points;
    j["top_n"] = config.top_n;
    j["aligned_baseline"] = config.aligned_baseline;
    j["seed"] = config.seed;
    j["train"] = config_json(config.base);
    write_text_file(join(run_dir, "config.json"), j.dump(2) + "\n");
  }

  RotationReport report;
  auto run = [&](mask::Variant variant, bool dropout, bool rotated) {
    train::TrainConfig tc = config.base;
    tc.mask.variant = variant;
    tc.dropout = dropout;
    tc.augmentation = rotated ? data::Augmentation::kJitterRot3 : data::Augmentation::kJitter;
    const std::string name =
        arm_name(mask::variant_name(variant),
                 std::string(rotated ? "rot3" : "aligned") + (dropout ? "_dropout" : "_nodropout"));
    say(progress, "training " + name);
    Arm arm = train_arm(train_set, tc);
    RotationRow row;
    row.variant = variant;
    row.dropout = dropout;
    row.rotated = rotated;
    row.metrics = evaluate(arm.model.model, rotated ? test_rotated : test_aligned, config.top_n);
    row.best_epoch = arm.model.best_epoch;
    row.seconds = arm.seconds;
    say(progress, name + ": accuracy " + format_double(row.metrics.overall_accuracy));
    if (!run_dir.empty()) {
      const auto& names = test_aligned.class_names;
      export_csv(training_log_table(arm.model.log), join(run_dir, name + "_log.csv"));
      export_csv(confusion_table(row.metrics, names), join(run_dir, name + "_confusion.csv"));
      export_csv(per_class_table(row.metrics, names), join(run_dir, name + "_per_class.csv"));
      export_csv(top_n_table(row.metrics), join(run_dir, name + "_top_n.csv"));
    }
    report.rows.push_back(std::move(row));
  };

  for (mask::Variant v : config.variants) {
    run(v, true, true);
    run(v, false, true);
  }
  if (config.aligned_baseline) run(mask::Variant::kBaseline, true, false);

  if (!run_dir.empty()) {
    export_csv(rotation_grid_table(report), join(run_dir, "rotation_grid.csv"));
    export_csv(rotation_top_n_table(report), join(run_dir, "rotation_top_n.csv"));
    write_text_file(join(run_dir, "summary.json"), rotation_summary_json(report) + "\n");
  }
  return report;
}

std::string rotation_summary_json(const RotationReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"variant", mask::variant_name(r.variant)},
                    {"dropout", r.dropout},
                    {"test", r.rotated ? "rot3" : "aligned"},
                    {"best_epoch", r.best_epoch},
                    {"seconds", r.seconds},
                    {"metrics", nlohmann::ordered_json::parse(metrics_json(r.metrics))}});
  }
  j["rows"] = rows;
  j["reference"] = {{"note", "published full-scale result, not reproduced at this scale"},
                    {"pointnet_rot3_accuracy", 0.7687},
                    {"pointnet_rot3_no_dropout_accuracy", 0.8113},
                    {"pointmask_rot3_accuracy", 0.8218}};
  return j.dump(2);
}

Table rotation_grid_table(const RotationReport& report) {
  Table t{{"variant", "test", "dropout_on", "dropout_off"}, {}};
  std::vector<std::pair<mask::Variant, bool>> keys;
  for (const auto& r : report.rows) {
    const std::pair<mask::Variant, bool> key{r.variant, r.rotated};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [variant, rotated] : keys) {
    const RotationRow* on = report.find(variant, true, rotated);
    const RotationRow* off = report.find(variant, false, rotated);
    t.rows.push_back({std::string(mask::variant_name(variant)), rotated ? "rot3" : "aligned",
                      on ? format_double(on->metrics.overall_accuracy) : "",
                      off ? format_double(off->metrics.overall_accuracy) : ""});
  }
  return t;
}

Table rotation_top_n_table(const RotationReport& report) {
  Table t{{"variant", "test", "dropout", "n", "accuracy"}, {}};
  for (const auto& r : report.rows) {
    for (const auto& [n, v] : r.metrics.top_n) {
      t.rows.push_back({std::string(mask::variant_name(r.variant)), r.rotated ? "rot3" : "aligned",
                        r.dropout ? "on" : "off", std::to_string(n), format_double(v)});
    }
  }
  return t;
}

}  // namespace pointmask::eval
