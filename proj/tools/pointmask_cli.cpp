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


// pointmask: command-line front end over the C API.

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "pointmask/pointmask.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// A contract violation reported by the library or detected here; exit code 1.
struct Failure {
  std::string message;
};

// A bad flag value found after parsing; exit code 2.
struct Usage {
  std::string message;
};

void check(pm_status status) {
  if (status != PM_OK) throw Failure{pm_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<pm_dataset, Deleter<pm_dataset, pm_dataset_free>>;
using Config = std::unique_ptr<pm_train_config, Deleter<pm_train_config, pm_train_config_free>>;
using Model = std::unique_ptr<pm_model, Deleter<pm_model, pm_model_free>>;
using Metrics = std::unique_ptr<pm_metrics, Deleter<pm_metrics, pm_metrics_free>>;
using Attribution = std::unique_ptr<pm_attribution, Deleter<pm_attribution, pm_attribution_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  pm_string_free(s);
  return out;
}

bool g_quiet = false;

void print_line(const char* line, void*) {
  if (!g_quiet) std::printf("%s\n", line);
  std::fflush(stdout);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// --seed when given, else POINTMASK_SEED, else 0.
struct SeedOption {
  std::uint64_t value = 0;
  CLI::Option* option = nullptr;

  void add(CLI::App* app) {
    option = app->add_option("--seed", value,
                             "Seed for all randomness; falls back to $POINTMASK_SEED, then 0");
  }

  std::uint64_t resolve() const {
    if (option && option->count() > 0) return value;
    const char* env = std::getenv("POINTMASK_SEED");
    if (!env || !*env) return 0;
    std::uint64_t v = 0;
    const std::string_view s = env;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw Usage{"POINTMASK_SEED must be a non-negative integer, got '" + std::string(s) + "'"};
    }
    return v;
  }
};

void require_positive(std::size_t v, const char* flag) {
  if (v == 0) throw Usage{std::string(flag) + " must be positive"};
}

void require_parent_dir(const std::string& path, const char* flag) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Usage{std::string(flag) + ": directory " + parent.string() + " does not exist"};
  }
}

void require_file(const std::string& path, const char* flag) {
  if (!fs::is_regular_file(path)) throw Usage{std::string(flag) + ": no such file " + path};
}

// Training flags shared by train, bias-exp and rot-exp.
struct TrainFlags {
  std::string variant = "pointmask";
  std::string profile;
  double alpha = 1e-3;
  double threshold = 0.5;
  double lr = 1e-4;
  std::size_t batch_size = 32;
  std::size_t epochs;
  std::string augmentation = "none";
  bool no_dropout = false;
  double dropout_rate = 0.3;
  double clip_norm = 0.0;
  double val_fraction = 0.1;
  double randmask_lo = 10.0;
  double randmask_hi = 70.0;
  std::size_t threads = 1;

  TrainFlags(std::string default_profile, std::size_t default_epochs)
      : profile(std::move(default_profile)), epochs(default_epochs) {}

  void add(CLI::App* app, bool with_variant) {
    if (with_variant) {
      app->add_option("--variant", variant, "pointmask | pointmap | randmask | baseline")
          ->capture_default_str();
    }
    app->add_option("--profile", profile, "Layer widths: desk | full")->capture_default_str();
    app->add_option("--alpha", alpha, "KL weight")->capture_default_str();
    app->add_option("--threshold", threshold, "Mask threshold t in [0, 1)")
        ->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Samples per step")->capture_default_str();
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--augment", augmentation, "none | jitter | jitter+rot1 | jitter+rot3")
        ->capture_default_str();
    app->add_flag("--no-dropout", no_dropout, "Disable dropout in the classifier head");
    app->add_option("--dropout-rate", dropout_rate, "Dropout rate before the last layer")
        ->capture_default_str();
    app->add_option("--clip-norm", clip_norm, "Global gradient-norm cap, 0 disables")
        ->capture_default_str();
    app->add_option("--val-fraction", val_fraction,
                    "Held-out share of the training set used for model selection")
        ->capture_default_str();
    app->add_option("--randmask-lo", randmask_lo, "RandMask lower percentage")
        ->capture_default_str();
    app->add_option("--randmask-hi", randmask_hi, "RandMask upper percentage")
        ->capture_default_str();
    app->add_option("--threads", threads, "Worker cap (computation is single-threaded)")
        ->capture_default_str();
  }

  Config build(std::uint64_t seed) const {
    if (threads == 0) throw Usage{"--threads must be positive"};
    pm_train_config* raw = nullptr;
    check(pm_train_config_create(profile == "full" ? "full" : "desk", &raw));
    Config c(raw);
    const std::map<std::string, std::string> values{
        {"variant", variant},
        {"profile", profile},
        {"alpha", repr(alpha)},
        {"threshold", repr(threshold)},
        {"learning_rate", repr(lr)},
        {"batch_size", std::to_string(batch_size)},
        {"epochs", std::to_string(epochs)},
        {"seed", std::to_string(seed)},
        {"augmentation", augmentation},
        {"dropout", no_dropout ? "false" : "true"},
        {"dropout_rate", repr(dropout_rate)},
        {"clip_norm", repr(clip_norm)},
        {"val_fraction", repr(val_fraction)},
        {"randmask_lo", repr(randmask_lo)},
        {"randmask_hi", repr(randmask_hi)},
    };
    for (const auto& [k, v] : values) {
      if (pm_train_config_set(c.get(), k.c_str(), v.c_str()) != PM_OK) {
        throw Usage{pm_last_error()};
      }
    }
    if (pm_train_config_validate(c.get()) != PM_OK) throw Usage{pm_last_error()};
    return c;
  }

  static std::string repr(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }
};

Dataset load_dataset(const std::string& path) {
  pm_dataset* raw = nullptr;
  check(pm_dataset_load(path.c_str(), &raw));
  return Dataset(raw);
}

Model load_model(const std::string& path) {
  pm_model* raw = nullptr;
  check(pm_model_load(path.c_str(), &raw));
  return Model(raw);
}

// ---- gen-data --------------------------------------------------------------

struct GenData {
  std::size_t classes = 6;
  std::size_t per_class = 100;
  std::size_t points = 256;
  std::size_t bias_points = 0;
  std::string bias_mode = "append";
  std::uint64_t bias_seed = 0;
  SeedOption seed;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--classes", classes, "Number of shape classes")->capture_default_str();
    app->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
    app->add_option("--points", points, "Object points per sample")->capture_default_str();
    app->add_option("--bias-points", bias_points,
                    "Bias pattern points per sample (0 disables the bias)")
        ->capture_default_str();
    app->add_option("--bias-mode", bias_mode, "append | replace")->capture_default_str();
    app->add_option("--bias-seed", bias_seed,
                    "Seed of the bias patterns; keep it equal for train and test sets")
        ->capture_default_str();
    seed.add(app);
    app->add_option("--out", out, "Output dataset (.pmds)")->required();
  }

  void run() const {
    require_positive(classes, "--classes");
    require_positive(per_class, "--per-class");
    if (points < 4) throw Usage{"--points must be at least 4"};
    if (bias_mode != "append" && bias_mode != "replace") {
      throw Usage{"--bias-mode must be append or replace"};
    }
    require_parent_dir(out, "--out");
    const std::uint64_t s = seed.resolve();
    pm_dataset* raw = nullptr;
    check(pm_dataset_generate(classes, per_class, points, s, &raw));
    Dataset ds(raw);
    if (bias_points > 0) {
      pm_dataset* biased = nullptr;
      check(pm_dataset_inject_bias(ds.get(), bias_points, bias_seed, bias_mode.c_str(), &biased));
      ds.reset(biased);
    }
    check(pm_dataset_save(ds.get(), out.c_str()));
    std::printf("wrote %s: %zu samples, %zu classes, %zu points\n", out.c_str(),
                pm_dataset_size(ds.get()), pm_dataset_num_classes(ds.get()),
                pm_dataset_num_points(ds.get()));
  }
};

// ---- ingest-off ------------------------------------------------------------

struct IngestOff {
  std::string input;
  std::size_t points = 256;
  SeedOption seed;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--input", input,
                    "Directory with one subdirectory of .off files per class")
        ->required();
    app->add_option("--points", points, "Surface points sampled per mesh")->capture_default_str();
    seed.add(app);
    app->add_option("--out", out, "Output dataset (.pmds)")->required();
  }

  void run() const {
    if (!fs::is_directory(input)) throw Usage{"--input: no such directory " + input};
    require_positive(points, "--points");
    require_parent_dir(out, "--out");
    std::vector<std::string> classes;
    for (const auto& e : fs::directory_iterator(input)) {
      if (e.is_directory()) classes.push_back(e.path().filename().string());
    }
    std::sort(classes.begin(), classes.end());
    if (classes.empty()) throw Failure{"no class directories under " + input};
    std::vector<std::string> paths;
    std::vector<std::uint32_t> labels;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      std::vector<std::string> files;
      for (const auto& e : fs::recursive_directory_iterator(fs::path(input) / classes[c])) {
        if (e.is_regular_file() && e.path().extension() == ".off") {
          files.push_back(e.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      for (auto& f : files) {
        paths.push_back(std::move(f));
        labels.push_back(static_cast<std::uint32_t>(c));
      }
    }
    std::vector<const char*> cpaths;
    for (const auto& p : paths) cpaths.push_back(p.c_str());
    std::vector<const char*> cnames;
    for (const auto& n : classes) cnames.push_back(n.c_str());
    pm_dataset* raw = nullptr;
    check(pm_dataset_from_off(cpaths.data(), labels.data(), paths.size(), cnames.data(),
                              classes.size(), points, seed.resolve(), &raw));
    Dataset ds(raw);
    check(pm_dataset_save(ds.get(), out.c_str()));
    std::printf("wrote %s: %zu samples\n", out.c_str(), pm_dataset_size(ds.get()));
    for (std::size_t c = 0; c < classes.size(); ++c) {
      std::printf("class %zu %s\n", c, classes[c].c_str());
    }
  }
};

// ---- train -----------------------------------------------------------------

struct Train {
  std::string data;
  std::string out;
  std::string last;
  std::string resume;
  std::string log_csv;
  TrainFlags flags{"full", 500};
  SeedOption seed;

  void add(CLI::App* app) {
    app->add_option("--data", data, "Training dataset (.pmds)")->required();
    app->add_option("--out", out, "Best checkpoint by held-out accuracy (.pmck)")->required();
    app->add_option("--last", last, "Final-state checkpoint for resuming (default OUT.last)");
    app->add_option("--resume", resume, "Continue from a final-state checkpoint");
    app->add_option("--log", log_csv, "Write the per-epoch training log as CSV");
    flags.add(app, true);
    seed.add(app);
  }

  void run() {
    require_file(data, "--data");
    if (!resume.empty()) require_file(resume, "--resume");
    require_parent_dir(out, "--out");
    if (last.empty()) last = out + ".last";
    require_parent_dir(last, "--last");
    if (!log_csv.empty()) require_parent_dir(log_csv, "--log");
    Config config = flags.build(seed.resolve());
    Dataset ds = load_dataset(data);
    Model start;
    if (!resume.empty()) start = load_model(resume);

    struct State {
      const Train* self;
      std::optional<Failure> error;
    } state{this, std::nullopt};
    auto on_epoch = [](const pm_epoch_info* info, const pm_model* model, void* user) {
      auto* st = static_cast<State*>(user);
      if (st->error) return;
      if (info->improved && pm_model_save(model, st->self->out.c_str()) != PM_OK) {
        st->error = Failure{pm_last_error()};
      }
    };
    pm_model* best = nullptr;
    pm_model* final_state = nullptr;
    check(pm_train(ds.get(), config.get(), start.get(), on_epoch, &state, &best, &final_state));
    Model best_model(best);
    Model final_model(final_state);
    if (state.error) throw *state.error;
    if (best_model) check(pm_model_save(best_model.get(), out.c_str()));
    check(pm_model_save(final_model.get(), last.c_str()));
    if (!log_csv.empty()) {
      char* csv = nullptr;
      check(pm_model_log_csv(final_model.get(), &csv));
      FILE* f = std::fopen(log_csv.c_str(), "wb");
      const std::string text = take_string(csv);
      if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        if (f) std::fclose(f);
        throw Failure{"cannot write " + log_csv};
      }
      std::fclose(f);
    }
    if (best_model) {
      std::printf("best epoch %u -> %s\n", pm_model_epoch(best_model.get()), out.c_str());
    } else {
      std::printf("no improvement over the resumed checkpoint; %s left unchanged\n", out.c_str());
    }
    std::printf("final epoch %u -> %s\n", pm_model_epoch(final_model.get()), last.c_str());
  }
};

// ---- eval ------------------------------------------------------------------

struct Eval {
  std::string model;
  std::string data;
  std::vector<std::size_t> top_n{1, 2, 3, 5};
  std::string confusion;
  std::string per_class;
  std::string json;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Checkpoint (.pmck)")->required();
    app->add_option("--data", data, "Test dataset (.pmds)")->required();
    app->add_option("--topn", top_n, "Comma-separated n for top-n accuracy")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--confusion", confusion, "Write the confusion matrix as CSV");
    app->add_option("--per-class", per_class, "Write per-class accuracy as CSV");
    app->add_option("--json", json, "Write all metrics as JSON");
  }

  void run() const {
    require_file(model, "--model");
    require_file(data, "--data");
    for (std::size_t n : top_n) require_positive(n, "--topn");
    for (const auto* p : {&confusion, &per_class, &json}) {
      if (!p->empty()) require_parent_dir(*p, "output");
    }
    Model m = load_model(model);
    Dataset ds = load_dataset(data);
    pm_metrics* raw = nullptr;
    check(pm_evaluate(m.get(), ds.get(), top_n.data(), top_n.size(), &raw));
    Metrics metrics(raw);
    std::printf("samples %zu\naccuracy %s\n", pm_dataset_size(ds.get()),
                fmt(pm_metrics_accuracy(metrics.get())).c_str());
    for (std::size_t n : top_n) {
      std::printf("top-%zu %s\n", n, fmt(pm_metrics_top_n(metrics.get(), n)).c_str());
    }
    for (std::size_t c = 0; c < pm_metrics_num_classes(metrics.get()); ++c) {
      std::printf("class %zu %s\n", c, fmt(pm_metrics_class_accuracy(metrics.get(), c)).c_str());
    }
    if (!confusion.empty()) check(pm_metrics_export_csv(metrics.get(), "confusion", confusion.c_str()));
    if (!per_class.empty()) check(pm_metrics_export_csv(metrics.get(), "per_class", per_class.c_str()));
    if (!json.empty()) {
      char* text = nullptr;
      check(pm_metrics_json(metrics.get(), &text));
      const std::string s = take_string(text) + "\n";
      FILE* f = std::fopen(json.c_str(), "wb");
      if (!f || std::fwrite(s.data(), 1, s.size(), f) != s.size()) {
        if (f) std::fclose(f);
        throw Failure{"cannot write " + json};
      }
      std::fclose(f);
    }
  }
};

// ---- attribute -------------------------------------------------------------

struct Attribute {
  std::string model;
  std::string data;
  std::size_t index = 0;
  std::string xyz;
  std::vector<double> thresholds{0.0, 0.25, 0.5, 0.75, 0.9};
  std::string out_dir;

  void add(CLI::App* app) {
    app->add_option("--model", model, "PointMask checkpoint (.pmck)")->required();
    auto* d = app->add_option("--data", data, "Dataset holding the cloud");
    app->add_option("--index", index, "Sample index in --data")->capture_default_str();
    auto* x = app->add_option("--xyz", xyz, "Read the cloud from an XYZ text file instead");
    d->excludes(x);
    app->add_option("--thresholds", thresholds, "Comma-separated mask thresholds")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--out-dir", out_dir, "Directory for one PLY per threshold");
  }

  void run() const {
    require_file(model, "--model");
    if (data.empty() && xyz.empty()) throw Usage{"one of --data or --xyz is required"};
    if (!data.empty()) require_file(data, "--data");
    if (!xyz.empty()) require_file(xyz, "--xyz");
    if (thresholds.empty()) throw Usage{"--thresholds must not be empty"};
    for (double t : thresholds) {
      if (!(t >= 0.0 && t < 1.0)) throw Usage{"--thresholds must lie in [0, 1)"};
    }
    Model m = load_model(model);
    std::vector<double> points;
    if (!xyz.empty()) {
      double* raw = nullptr;
      std::size_t n = 0;
      check(pm_xyz_load(xyz.c_str(), &raw, &n));
      points.assign(raw, raw + 3 * n);
      pm_points_free(raw);
    } else {
      Dataset ds = load_dataset(data);
      std::size_t n = 0;
      check(pm_dataset_sample_info(ds.get(), index, nullptr, &n));
      points.resize(3 * n);
      check(pm_dataset_sample_points(ds.get(), index, points.data(), points.size()));
    }
    pm_attribution* raw = nullptr;
    check(pm_attribute(m.get(), points.data(), points.size() / 3, thresholds.data(),
                       thresholds.size(), &raw));
    Attribution a(raw);
    if (!out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw Failure{"cannot create " + out_dir + ": " + ec.message()};
    }
    std::printf("threshold survivors predicted probability\n");
    for (std::size_t i = 0; i < pm_attribution_count(a.get()); ++i) {
      std::printf("%s %zu/%zu %u %s\n", fmt(pm_attribution_threshold(a.get(), i)).c_str(),
                  pm_attribution_survivors(a.get(), i), pm_attribution_num_points(a.get()),
                  pm_attribution_predicted(a.get(), i),
                  fmt(pm_attribution_probability(a.get(), i)).c_str());
      if (!out_dir.empty()) {
        const std::string path =
            (fs::path(out_dir) / ("mask_t" + TrainFlags::repr(thresholds[i]) + ".ply")).string();
        check(pm_attribution_export_ply(a.get(), i, path.c_str()));
      }
    }
  }
};

// ---- experiments -----------------------------------------------------------

struct Sizes {
  std::size_t classes = 6;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 30;
  std::size_t points = 256;

  void add(CLI::App* app) {
    app->add_option("--classes", classes, "Number of shape classes")->capture_default_str();
    app->add_option("--train-per-class", train_per_class, "Training samples per class")
        ->capture_default_str();
    app->add_option("--test-per-class", test_per_class, "Test samples per class")
        ->capture_default_str();
    app->add_option("--points", points, "Object points per sample")->capture_default_str();
  }

  void validate() const {
    require_positive(classes, "--classes");
    require_positive(train_per_class, "--train-per-class");
    require_positive(test_per_class, "--test-per-class");
    if (points < 4) throw Usage{"--points must be at least 4"};
  }
};

void print_summary(const std::string& run_dir, char* summary) {
  const std::string s = take_string(summary);
  std::printf("artifacts in %s\n%s\n", run_dir.c_str(), s.c_str());
}

struct BiasExp {
  std::vector<std::size_t> levels{0, 1, 50, 100, 256};
  std::vector<std::string> variants{"baseline", "randmask", "pointmask", "pointmap"};
  std::string bias_mode = "append";
  std::size_t attribution_samples = 1;
  std::string run_dir = "bias_run";
  Sizes sizes;
  TrainFlags flags{"desk", 50};
  SeedOption seed;

  void add(CLI::App* app) {
    app->add_option("--levels", levels, "Comma-separated bias points per class")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--variants", variants, "Comma-separated variants")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--bias-mode", bias_mode, "append | replace")->capture_default_str();
    app->add_option("--attribution-samples", attribution_samples,
                    "Biased test clouds per class exported as PLY for PointMask arms")
        ->capture_default_str();
    app->add_option("--run-dir", run_dir, "Output directory")->capture_default_str();
    sizes.add(app);
    flags.add(app, false);
    seed.add(app);
  }

  void run() const {
    sizes.validate();
    if (levels.empty() || variants.empty()) throw Usage{"--levels and --variants are required"};
    if (bias_mode != "append" && bias_mode != "replace") {
      throw Usage{"--bias-mode must be append or replace"};
    }
    const std::uint64_t s = seed.resolve();
    Config base = flags.build(s);
    std::vector<const char*> names;
    for (const auto& v : variants) {
      if (pm_train_config_set(base.get(), "variant", v.c_str()) != PM_OK) throw Usage{pm_last_error()};
      names.push_back(v.c_str());
    }
    pm_bias_options o;
    pm_bias_options_default(&o);
    o.levels = levels.data();
    o.num_levels = levels.size();
    o.variants = names.data();
    o.num_variants = names.size();
    o.num_classes = sizes.classes;
    o.train_per_class = sizes.train_per_class;
    o.test_per_class = sizes.test_per_class;
    o.num_points = sizes.points;
    o.mode = bias_mode.c_str();
    o.attribution_samples = attribution_samples;
    o.seed = s;
    char* summary = nullptr;
    check(pm_bias_experiment(&o, base.get(), run_dir.c_str(), &summary));
    print_summary(run_dir, summary);
  }
};

struct RotExp {
  std::vector<std::string> variants{"baseline", "pointmask"};
  std::vector<std::size_t> top_n{1, 2, 3, 5};
  bool no_aligned = false;
  std::string run_dir = "rotation_run";
  Sizes sizes;
  TrainFlags flags{"desk", 50};
  SeedOption seed;

  void add(CLI::App* app) {
    app->add_option("--variants", variants, "Comma-separated variants")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--topn", top_n, "Comma-separated n for top-n accuracy")
        ->delimiter(',')
        ->capture_default_str();
    app->add_flag("--no-aligned", no_aligned, "Skip the aligned baseline reference arm");
    app->add_option("--run-dir", run_dir, "Output directory")->capture_default_str();
    sizes.add(app);
    flags.add(app, false);
    seed.add(app);
  }

  void run() const {
    sizes.validate();
    if (variants.empty()) throw Usage{"--variants is required"};
    for (std::size_t n : top_n) require_positive(n, "--topn");
    const std::uint64_t s = seed.resolve();
    Config base = flags.build(s);
    std::vector<const char*> names;
    for (const auto& v : variants) {
      if (pm_train_config_set(base.get(), "variant", v.c_str()) != PM_OK) throw Usage{pm_last_error()};
      names.push_back(v.c_str());
    }
    pm_rotation_options o;
    pm_rotation_options_default(&o);
    o.variants = names.data();
    o.num_variants = names.size();
    o.num_classes = sizes.classes;
    o.train_per_class = sizes.train_per_class;
    o.test_per_class = sizes.test_per_class;
    o.num_points = sizes.points;
    o.top_n = top_n.data();
    o.num_top_n = top_n.size();
    o.aligned_baseline = no_aligned ? 0 : 1;
    o.seed = s;
    char* summary = nullptr;
    check(pm_rotation_experiment(&o, base.get(), run_dir.c_str(), &summary));
    print_summary(run_dir, summary);
  }
};

// ---- gradcheck -------------------------------------------------------------

struct GradCheck {
  double tolerance = 1e-4;
  SeedOption seed;
  bool verbose = false;

  void add(CLI::App* app) {
    app->add_option("--tolerance", tolerance, "Largest accepted relative error")
        ->capture_default_str();
    seed.add(app);
    app->add_flag("--verbose", verbose, "Print every case");
  }

  int run() const {
    if (!(tolerance > 0.0)) throw Usage{"--tolerance must be positive"};
    int passed = 0;
    char* report = nullptr;
    check(pm_gradcheck(tolerance, seed.resolve(), &passed, &report));
    const std::string text = take_string(report);
    std::size_t cases = 0, failed = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      const std::size_t end = text.find('\n', start);
      const std::string line = text.substr(start, end - start);
      ++cases;
      const bool bad = line.ends_with(" FAIL");
      if (bad) ++failed;
      if (verbose || bad) std::printf("%s\n", line.c_str());
      start = end == std::string::npos ? text.size() : end + 1;
    }
    std::printf("gradcheck: %zu cases, %zu failed, tolerance %g\n", cases, failed, tolerance);
    return passed ? 0 : kExitFailure;
  }
};

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Activation buffers of a training step run to tens of megabytes. Keep them
  // on the heap instead of a fresh zero-filled mapping per allocation.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"PointMask point-set classifier with information-bottleneck masking"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--quiet", g_quiet, "Suppress progress output");

  GenData gen;
  IngestOff ingest;
  Train train;
  Eval eval;
  Attribute attribute;
  BiasExp bias;
  RotExp rot;
  GradCheck grad;
  gen.add(app.add_subcommand("gen-data", "Generate a synthetic (optionally biased) dataset"));
  ingest.add(app.add_subcommand("ingest-off", "Sample a dataset from OFF meshes"));
  train.add(app.add_subcommand("train", "Train a model"));
  eval.add(app.add_subcommand("eval", "Evaluate a checkpoint on a dataset"));
  attribute.add(app.add_subcommand("attribute", "Per-point mask attribution over thresholds"));
  bias.add(app.add_subcommand("bias-exp", "Bias-injection experiment"));
  rot.add(app.add_subcommand("rot-exp", "Rotation experiment"));
  grad.add(app.add_subcommand("gradcheck", "Finite-difference check of the numerical core"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    std::fprintf(stderr, "Run with --help for more information.\n");
    return kExitUsage;
  }

  pm_set_log_callback(print_line, nullptr);
  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen-data") gen.run();
    else if (name == "ingest-off") ingest.run();
    else if (name == "train") train.run();
    else if (name == "eval") eval.run();
    else if (name == "attribute") attribute.run();
    else if (name == "bias-exp") bias.run();
    else if (name == "rot-exp") rot.run();
    else if (name == "gradcheck") return grad.run();
  } catch (const Usage& e) {
    std::fprintf(stderr, "usage error: %s\n", e.message.c_str());
    return kExitUsage;
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return kExitFailure;
  }
  return 0;
}
