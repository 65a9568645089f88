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


#include "pointmask/pointmask.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <new>
#include <optional>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "core/binary_io.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "data/augment.hpp"
#include "data/bias.hpp"
#include "data/io.hpp"
#include "data/mesh.hpp"
#include "data/point_cloud.hpp"
#include "data/shapes.hpp"
#include "evalreport/evalreport.hpp"
#include "evalreport/experiments.hpp"
#include "train/checkpoint.hpp"
#include "train/gradcheck_suite.hpp"
#include "train/train.hpp"

namespace pm = pointmask;

struct pm_dataset {
  pm::data::Dataset value;
};

struct pm_train_config {
  pm::train::TrainConfig value;
};

struct pm_model {
  pm::train::Checkpoint value;
};

struct pm_metrics {
  pm::eval::Metrics value;
  std::vector<std::string> class_names;
};

struct pm_attribution {
  std::vector<pm::eval::AttributionRecord> records;
};

namespace {

constexpr std::uint64_t kOffStream = 0x6f666673;

thread_local std::string g_last_error;

std::mutex g_log_mutex;
pm_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void log_line(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_log_fn) g_log_fn(line.c_str(), g_log_user);
}

pm_status fail(pm_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

struct InvalidArgument : std::exception {
  explicit InvalidArgument(std::string m) : message(std::move(m)) {}
  const char* what() const noexcept override { return message.c_str(); }
  std::string message;
};

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

template <typename F>
pm_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PM_OK;
  } catch (const InvalidArgument& e) {
    return fail(PM_ERR_INVALID_ARGUMENT, e.message);
  } catch (const pm::ConfigError& e) {
    return fail(PM_ERR_CONFIG, e.what());
  } catch (const pm::DimensionError& e) {
    return fail(PM_ERR_DIMENSION, e.what());
  } catch (const pm::DomainError& e) {
    return fail(PM_ERR_DOMAIN, e.what());
  } catch (const pm::IndexError& e) {
    return fail(PM_ERR_INDEX, e.what());
  } catch (const pm::ContractError& e) {
    return fail(PM_ERR_CONTRACT, e.what());
  } catch (const pm::ParseError& e) {
    return fail(PM_ERR_PARSE, e.what());
  } catch (const pm::FormatError& e) {
    return fail(PM_ERR_FORMAT, e.what());
  } catch (const pm::IoError& e) {
    return fail(PM_ERR_IO, e.what());
  } catch (const pm::TrainingError& e) {
    return fail(PM_ERR_TRAINING, e.what());
  } catch (const pm::VariantError& e) {
    return fail(PM_ERR_VARIANT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PM_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw pm::ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::uint64_t parse_count(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw pm::ConfigError(std::string(key) + ": '" + std::string(text) +
                          "' is not a non-negative integer");
  }
  return v;
}

bool parse_flag(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on") return true;
  if (text == "0" || text == "false" || text == "off") return false;
  throw pm::ConfigError(std::string(key) + ": expected true or false, got '" +
                        std::string(text) + "'");
}

pm::data::PointCloud cloud_from(const double* points, std::size_t n) {
  require(points != nullptr && n > 0, "points must be a non-empty n x 3 array");
  pm::data::PointCloud c;
  c.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 3; ++k) c.points[i][k] = points[3 * i + k];
  }
  return c;
}

const pm::eval::AttributionRecord& record_at(const pm_attribution* a, std::size_t i) {
  if (!a || i >= a->records.size()) throw InvalidArgument("attribution index out of range");
  return a->records[i];
}

}  // namespace

extern "C" {

const char* pm_version(void) { return "0.1.0"; }

const char* pm_status_name(pm_status status) {
  switch (status) {
    case PM_OK: return "ok";
    case PM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PM_ERR_CONFIG: return "config error";
    case PM_ERR_DIMENSION: return "dimension error";
    case PM_ERR_DOMAIN: return "domain error";
    case PM_ERR_INDEX: return "index error";
    case PM_ERR_CONTRACT: return "contract error";
    case PM_ERR_PARSE: return "parse error";
    case PM_ERR_FORMAT: return "format error";
    case PM_ERR_IO: return "i/o error";
    case PM_ERR_TRAINING: return "training error";
    case PM_ERR_VARIANT: return "variant error";
    case PM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pm_last_error(void) { return g_last_error.c_str(); }

void pm_string_free(char* s) { std::free(s); }

void pm_set_log_callback(pm_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

// Datasets.

pm_status pm_dataset_generate(size_t num_classes, size_t per_class, size_t num_points,
                              uint64_t seed, pm_dataset** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    auto ds = pm::data::generate_synthetic({num_classes, per_class, num_points, seed});
    *out = new pm_dataset{std::move(ds)};
  });
}

pm_status pm_dataset_inject_bias(const pm_dataset* ds, size_t points_per_class, uint64_t seed,
                                 const char* mode, pm_dataset** out) {
  return guard([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto m = pm::data::parse_bias_mode(mode ? mode : "append");
    const auto spec =
        pm::data::make_bias_spec(ds->value.num_classes(), points_per_class, seed, m);
    *out = new pm_dataset{pm::data::inject_bias(ds->value, spec)};
  });
}

pm_status pm_dataset_from_off(const char* const* paths, const uint32_t* labels, size_t count,
                              const char* const* class_names, size_t num_classes,
                              size_t num_points, uint64_t seed, pm_dataset** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    require(count == 0 || (paths != nullptr && labels != nullptr), "null paths or labels");
    require(num_classes > 0, "num_classes must be positive");
    if (num_points < 1) throw pm::ConfigError("point count must be at least 1");
    pm::data::Dataset ds;
    if (class_names) {
      for (size_t c = 0; c < num_classes; ++c) {
        require(class_names[c] != nullptr, "null class name");
        ds.class_names.emplace_back(class_names[c]);
      }
    } else {
      ds.class_names = pm::data::default_class_names(num_classes);
    }
    for (size_t i = 0; i < count; ++i) {
      require(paths[i] != nullptr, "null path");
      if (labels[i] >= num_classes) {
        throw pm::ConfigError(std::string(paths[i]) + ": label " + std::to_string(labels[i]) +
                              " outside [0, " + std::to_string(num_classes) + ")");
      }
      const auto mesh = pm::data::off_read_file(paths[i]);
      pm::Rng rng(pm::derive_seed(seed, kOffStream, i));
      auto cloud = pm::data::sample_mesh_surface(mesh, num_points, rng);
      cloud = pm::data::quantize_f32(pm::data::normalize_unit_sphere(cloud));
      ds.samples.push_back({std::move(cloud), labels[i]});
    }
    ds.validate();
    *out = new pm_dataset{std::move(ds)};
  });
}

pm_status pm_dataset_load(const char* path, pm_dataset** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new pm_dataset{pm::data::dataset_load(path)};
  });
}

pm_status pm_dataset_save(const pm_dataset* ds, const char* path) {
  return guard([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    pm::data::dataset_save(ds->value, path);
  });
}

void pm_dataset_free(pm_dataset* ds) { delete ds; }

size_t pm_dataset_size(const pm_dataset* ds) { return ds ? ds->value.samples.size() : 0; }

size_t pm_dataset_num_classes(const pm_dataset* ds) { return ds ? ds->value.num_classes() : 0; }

size_t pm_dataset_num_points(const pm_dataset* ds) { return ds ? ds->value.num_points() : 0; }

pm_status pm_dataset_sample_info(const pm_dataset* ds, size_t index, uint32_t* label,
                                 size_t* num_points) {
  return guard([&] {
    require(ds != nullptr, "dataset is null");
    if (index >= ds->value.samples.size()) throw pm::IndexError("sample index out of range");
    const auto& s = ds->value.samples[index];
    if (label) *label = s.label;
    if (num_points) *num_points = s.cloud.size();
  });
}

pm_status pm_dataset_sample_points(const pm_dataset* ds, size_t index, double* out,
                                   size_t capacity) {
  return guard([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    if (index >= ds->value.samples.size()) throw pm::IndexError("sample index out of range");
    const auto& pts = ds->value.samples[index].cloud.points;
    if (capacity < 3 * pts.size()) throw pm::DimensionError("output buffer too small");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) out[3 * i + k] = pts[i][k];
    }
  });
}

pm_status pm_xyz_load(const char* path, double** points, size_t* num_points) {
  return guard([&] {
    require(path != nullptr && points != nullptr && num_points != nullptr, "null argument");
    *points = nullptr;
    *num_points = 0;
    const auto bytes = pm::read_file_bytes(path);
    const auto cloud = pm::data::xyz_parse(std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    auto* out = static_cast<double*>(std::malloc(3 * cloud.size() * sizeof(double)));
    if (!out) throw std::bad_alloc();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (std::size_t k = 0; k < 3; ++k) out[3 * i + k] = cloud.points[i][k];
    }
    *points = out;
    *num_points = cloud.size();
  });
}

void pm_points_free(double* points) { std::free(points); }

// Training configuration.

pm_status pm_train_config_create(const char* profile, pm_train_config** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    const std::string_view p = profile ? profile : "full";
    pm::train::TrainConfig c;
    if (p == "desk") {
      c = pm::train::TrainConfig::desk();
    } else if (p != "full") {
      throw pm::ConfigError("unknown profile '" + std::string(p) + "' (expected full|desk)");
    }
    *out = new pm_train_config{c};
  });
}

void pm_train_config_free(pm_train_config* config) { delete config; }

pm_status pm_train_config_set(pm_train_config* config, const char* key, const char* value) {
  return guard([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "null argument");
    const std::string_view k = key;
    const std::string_view v = value;
    pm::train::TrainConfig& c = config->value;
    if (k == "variant") {
      c.mask.variant = pm::mask::parse_variant(v);
    } else if (k == "threshold") {
      c.mask.threshold = parse_number(k, v);
    } else if (k == "randmask_lo") {
      c.mask.randmask_lo = parse_number(k, v);
    } else if (k == "randmask_hi") {
      c.mask.randmask_hi = parse_number(k, v);
    } else if (k == "alpha") {
      c.alpha = parse_number(k, v);
    } else if (k == "learning_rate") {
      c.learning_rate = parse_number(k, v);
    } else if (k == "batch_size") {
      c.batch_size = parse_count(k, v);
    } else if (k == "epochs") {
      c.epochs = parse_count(k, v);
    } else if (k == "seed") {
      c.seed = parse_count(k, v);
    } else if (k == "augmentation") {
      c.augmentation = pm::data::parse_augmentation(v);
    } else if (k == "dropout") {
      c.dropout = parse_flag(k, v);
    } else if (k == "dropout_rate") {
      c.dropout_rate = parse_number(k, v);
    } else if (k == "profile") {
      pm::nn::WidthProfile::by_name(v);
      c.profile = std::string(v);
    } else if (k == "clip_norm") {
      c.clip_norm = parse_number(k, v);
    } else if (k == "val_fraction") {
      c.val_fraction = parse_number(k, v);
    } else {
      throw pm::ConfigError("unknown training option '" + std::string(k) + "'");
    }
  });
}

pm_status pm_train_config_validate(const pm_train_config* config) {
  return guard([&] {
    require(config != nullptr, "config is null");
    config->value.validate();
  });
}

pm_status pm_train_config_to_json(const pm_train_config* config, char** out) {
  return guard([&] {
    require(config != nullptr && out != nullptr, "null argument");
    *out = dup_string(pm::train::config_to_json(config->value));
  });
}

// Models and training.

pm_status pm_train(const pm_dataset* ds, const pm_train_config* config, const pm_model* resume,
                   pm_epoch_fn on_epoch, void* user, pm_model** best, pm_model** last) {
  return guard([&] {
    require(ds != nullptr && config != nullptr, "null dataset or config");
    if (best) *best = nullptr;
    if (last) *last = nullptr;
    pm::train::FitOptions options;
    options.resume = resume ? &resume->value : nullptr;
    options.on_epoch = [&](const pm::train::Checkpoint& state, bool improved) {
      const auto& r = state.log.back();
      char line[256];
      std::snprintf(line, sizeof line,
                    "epoch %u loss %.4f ce %.4f kl %.4f train_acc %.4f val_acc %.4f%s", r.epoch,
                    r.loss, r.ce, r.kl, r.train_accuracy, r.val_accuracy, improved ? " *" : "");
      log_line(line);
      if (on_epoch) {
        const pm_epoch_info info{r.epoch, r.loss, r.ce, r.kl, r.train_accuracy, r.val_accuracy,
                                 improved ? 1 : 0};
        const pm_model view{state};
        on_epoch(&info, &view, user);
      }
    };
    pm::train::FitResult result = pm::train::fit(ds->value, config->value, options);
    if (best && result.best) *best = new pm_model{std::move(*result.best)};
    if (last) *last = new pm_model{std::move(result.final)};
  });
}

pm_status pm_model_load(const char* path, pm_model** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new pm_model{pm::train::checkpoint_load(path)};
  });
}

pm_status pm_model_save(const pm_model* model, const char* path) {
  return guard([&] {
    require(model != nullptr && path != nullptr, "null argument");
    pm::train::checkpoint_save(model->value, path);
  });
}

pm_status pm_model_clone(const pm_model* model, pm_model** out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = new pm_model{model->value};
  });
}

void pm_model_free(pm_model* model) { delete model; }

size_t pm_model_num_classes(const pm_model* model) {
  return model ? model->value.model.num_classes() : 0;
}

size_t pm_model_num_points(const pm_model* model) {
  return model ? model->value.model.num_points() : 0;
}

uint32_t pm_model_epoch(const pm_model* model) { return model ? model->value.epoch : 0; }

const char* pm_model_variant(const pm_model* model) {
  if (!model) return "";
  return pm::mask::variant_name(model->value.config.mask.variant).data();
}

pm_status pm_model_config_json(const pm_model* model, char** out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = dup_string(pm::train::config_to_json(model->value.config));
  });
}

pm_status pm_model_log_csv(const pm_model* model, char** out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = dup_string(pm::eval::to_csv(pm::eval::training_log_table(model->value.log)));
  });
}

pm_status pm_predict(const pm_model* model, const double* points, size_t num_points,
                     double* out, size_t capacity) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "null argument");
    const auto& m = model->value.model;
    if (capacity < m.num_classes()) throw pm::DimensionError("output buffer too small");
    const pm::data::PointCloud cloud = cloud_from(points, num_points);
    const auto logits = pm::train::predict_logits(m, std::span(&cloud, 1));
    for (std::size_t c = 0; c < m.num_classes(); ++c) out[c] = logits[0][c];
  });
}

// Evaluation.

pm_status pm_evaluate(const pm_model* model, const pm_dataset* ds, const size_t* top_n,
                      size_t num_top_n, pm_metrics** out) {
  return guard([&] {
    require(model != nullptr && ds != nullptr && out != nullptr, "null argument");
    require(num_top_n == 0 || top_n != nullptr, "top_n is null");
    *out = nullptr;
    std::vector<std::size_t> n(top_n, top_n + num_top_n);
    if (n.empty()) n.assign(std::begin(pm::eval::kDefaultTopN), std::end(pm::eval::kDefaultTopN));
    auto metrics = pm::eval::evaluate(model->value.model, ds->value, n);
    *out = new pm_metrics{std::move(metrics), ds->value.class_names};
  });
}

void pm_metrics_free(pm_metrics* metrics) { delete metrics; }

double pm_metrics_accuracy(const pm_metrics* metrics) {
  return metrics ? metrics->value.overall_accuracy : std::numeric_limits<double>::quiet_NaN();
}

size_t pm_metrics_num_classes(const pm_metrics* metrics) {
  return metrics ? metrics->value.confusion.size() : 0;
}

double pm_metrics_top_n(const pm_metrics* metrics, size_t n) {
  if (!metrics) return std::numeric_limits<double>::quiet_NaN();
  const auto it = metrics->value.top_n.find(n);
  return it == metrics->value.top_n.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

double pm_metrics_class_accuracy(const pm_metrics* metrics, size_t label) {
  if (!metrics || label >= metrics->value.per_class_accuracy.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return metrics->value.per_class_accuracy[label];
}

size_t pm_metrics_confusion(const pm_metrics* metrics, size_t true_label, size_t predicted) {
  if (!metrics) return 0;
  const auto& c = metrics->value.confusion;
  if (true_label >= c.size() || predicted >= c.size()) return 0;
  return c[true_label][predicted];
}

pm_status pm_metrics_json(const pm_metrics* metrics, char** out) {
  return guard([&] {
    require(metrics != nullptr && out != nullptr, "null argument");
    *out = dup_string(pm::eval::metrics_json(metrics->value));
  });
}

pm_status pm_metrics_export_csv(const pm_metrics* metrics, const char* which, const char* path) {
  return guard([&] {
    require(metrics != nullptr && which != nullptr && path != nullptr, "null argument");
    const std::string_view w = which;
    if (w == "confusion") {
      pm::eval::export_csv(pm::eval::confusion_table(metrics->value, metrics->class_names), path);
    } else if (w == "per_class") {
      pm::eval::export_csv(pm::eval::per_class_table(metrics->value, metrics->class_names), path);
    } else if (w == "top_n") {
      pm::eval::export_csv(pm::eval::top_n_table(metrics->value), path);
    } else {
      throw InvalidArgument("unknown table '" + std::string(w) +
                            "' (expected confusion|per_class|top_n)");
    }
  });
}

// Attribution.

pm_status pm_attribute(const pm_model* model, const double* points, size_t num_points,
                       const double* thresholds, size_t num_thresholds, pm_attribution** out) {
  return guard([&] {
    require(model != nullptr && out != nullptr, "null argument");
    require(num_thresholds == 0 || thresholds != nullptr, "thresholds is null");
    *out = nullptr;
    const pm::data::PointCloud cloud = cloud_from(points, num_points);
    auto records = pm::eval::attribute(model->value.model, cloud,
                                       std::span(thresholds, num_thresholds));
    *out = new pm_attribution{std::move(records)};
  });
}

void pm_attribution_free(pm_attribution* a) { delete a; }

size_t pm_attribution_count(const pm_attribution* a) { return a ? a->records.size() : 0; }

size_t pm_attribution_num_points(const pm_attribution* a) {
  return a && !a->records.empty() ? a->records.front().points.size() : 0;
}

double pm_attribution_threshold(const pm_attribution* a, size_t i) {
  return a && i < a->records.size() ? a->records[i].threshold
                                    : std::numeric_limits<double>::quiet_NaN();
}

size_t pm_attribution_survivors(const pm_attribution* a, size_t i) {
  return a && i < a->records.size() ? a->records[i].survivors() : 0;
}

uint32_t pm_attribution_predicted(const pm_attribution* a, size_t i) {
  return a && i < a->records.size() ? static_cast<uint32_t>(a->records[i].predicted) : 0;
}

double pm_attribution_probability(const pm_attribution* a, size_t i) {
  return a && i < a->records.size() ? a->records[i].probability
                                    : std::numeric_limits<double>::quiet_NaN();
}

pm_status pm_attribution_mask(const pm_attribution* a, size_t i, double* out, size_t capacity) {
  return guard([&] {
    require(out != nullptr, "out is null");
    const auto& r = record_at(a, i);
    if (capacity < r.mask.size()) throw pm::DimensionError("output buffer too small");
    std::copy(r.mask.begin(), r.mask.end(), out);
  });
}

pm_status pm_attribution_export_ply(const pm_attribution* a, size_t i, const char* path) {
  return guard([&] {
    require(path != nullptr, "path is null");
    pm::eval::export_attribution_ply(record_at(a, i), path);
  });
}

// Experiments.

void pm_bias_options_default(pm_bias_options* options) {
  if (!options) return;
  static const size_t levels[] = {0, 1, 50, 100, 256};
  static const char* const variants[] = {"baseline", "randmask", "pointmask", "pointmap"};
  *options = pm_bias_options{levels, 5, variants, 4, 6, 100, 30, 256, "append", 1, 0};
}

void pm_rotation_options_default(pm_rotation_options* options) {
  if (!options) return;
  static const char* const variants[] = {"baseline", "pointmask"};
  static const size_t top_n[] = {1, 2, 3, 5};
  *options = pm_rotation_options{variants, 2, 6, 100, 30, 256, top_n, 4, 1, 0};
}

pm_status pm_bias_experiment(const pm_bias_options* options, const pm_train_config* base,
                             const char* run_dir, char** summary) {
  return guard([&] {
    require(options != nullptr && base != nullptr, "null options or config");
    require(options->num_levels == 0 || options->levels != nullptr, "levels is null");
    require(options->num_variants == 0 || options->variants != nullptr, "variants is null");
    pm::eval::BiasExperimentConfig c;
    c.levels.assign(options->levels, options->levels + options->num_levels);
    c.variants.clear();
    for (size_t i = 0; i < options->num_variants; ++i) {
      require(options->variants[i] != nullptr, "null variant name");
      c.variants.push_back(pm::mask::parse_variant(options->variants[i]));
    }
    c.num_classes = options->num_classes;
    c.train_per_class = options->train_per_class;
    c.test_per_class = options->test_per_class;
    c.num_points = options->num_points;
    c.mode = pm::data::parse_bias_mode(options->mode ? options->mode : "append");
    c.attribution_samples = options->attribution_samples;
    c.seed = options->seed;
    c.base = base->value;
    const auto report = pm::eval::bias_experiment(c, run_dir ? run_dir : "", log_line);
    if (summary) *summary = dup_string(pm::eval::bias_summary_json(report));
  });
}

pm_status pm_rotation_experiment(const pm_rotation_options* options, const pm_train_config* base,
                                 const char* run_dir, char** summary) {
  return guard([&] {
    require(options != nullptr && base != nullptr, "null options or config");
    require(options->num_variants == 0 || options->variants != nullptr, "variants is null");
    require(options->num_top_n == 0 || options->top_n != nullptr, "top_n is null");
    pm::eval::RotationExperimentConfig c;
    c.variants.clear();
    for (size_t i = 0; i < options->num_variants; ++i) {
      require(options->variants[i] != nullptr, "null variant name");
      c.variants.push_back(pm::mask::parse_variant(options->variants[i]));
    }
    c.num_classes = options->num_classes;
    c.train_per_class = options->train_per_class;
    c.test_per_class = options->test_per_class;
    c.num_points = options->num_points;
    if (options->num_top_n > 0) c.top_n.assign(options->top_n, options->top_n + options->num_top_n);
    c.aligned_baseline = options->aligned_baseline != 0;
    c.seed = options->seed;
    c.base = base->value;
    const auto report = pm::eval::rotation_experiment(c, run_dir ? run_dir : "", log_line);
    if (summary) *summary = dup_string(pm::eval::rotation_summary_json(report));
  });
}

// Numerical self-test.

pm_status pm_gradcheck(double tolerance, uint64_t seed, int* passed, char** report) {
  return guard([&] {
    require(passed != nullptr, "passed is null");
    if (!(tolerance > 0.0)) throw pm::ConfigError("tolerance must be positive");
    const auto suite = pm::train::run_gradcheck_suite(tolerance, seed);
    *passed = suite.passed() ? 1 : 0;
    if (report) {
      std::string text;
      for (const auto& c : suite.cases) {
        text += c.name + " " + pm::eval::format_double(c.max_rel_error) +
                (c.passed ? "" : " FAIL") + "\n";
      }
      *report = dup_string(text);
    }
  });
}

}  // extern "C"
