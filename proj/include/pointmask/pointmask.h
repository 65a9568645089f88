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


/* C interface to the PointMask library. Every function that can fail returns
 * a pm_status; on failure pm_last_error() holds a one-line message for the
 * calling thread. Handles are opaque and must be released with their _free
 * function. Strings returned through char** are released with pm_string_free. */

#ifndef POINTMASK_POINTMASK_H_
#define POINTMASK_POINTMASK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define PM_API __declspec(dllexport)
#else
#  define PM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pm_status {
  PM_OK = 0,
  PM_ERR_INVALID_ARGUMENT = 1, /* null handle or pointer, unknown CSV selector */
  PM_ERR_CONFIG = 2,
  PM_ERR_DIMENSION = 3,
  PM_ERR_DOMAIN = 4,
  PM_ERR_INDEX = 5,
  PM_ERR_CONTRACT = 6,
  PM_ERR_PARSE = 7,
  PM_ERR_FORMAT = 8,
  PM_ERR_IO = 9,
  PM_ERR_TRAINING = 10,
  PM_ERR_VARIANT = 11,
  PM_ERR_INTERNAL = 12
} pm_status;

PM_API const char* pm_version(void);
PM_API const char* pm_status_name(pm_status status);
/* Message of the last failed call on this thread; "" if none. */
PM_API const char* pm_last_error(void);
PM_API void pm_string_free(char* s);

/* Progress lines from training and the experiment harnesses. */
typedef void (*pm_log_fn)(const char* line, void* user);
PM_API void pm_set_log_callback(pm_log_fn fn, void* user);

/* ---- datasets ---------------------------------------------------------- */

typedef struct pm_dataset pm_dataset;

PM_API pm_status pm_dataset_generate(size_t num_classes, size_t per_class, size_t num_points,
                                     uint64_t seed, pm_dataset** out);
/* mode is "append" or "replace". */
PM_API pm_status pm_dataset_inject_bias(const pm_dataset* ds, size_t points_per_class,
                                        uint64_t seed, const char* mode, pm_dataset** out);
/* Samples n surface points from each OFF file; labels index into class_names. */
PM_API pm_status pm_dataset_from_off(const char* const* paths, const uint32_t* labels,
                                     size_t count, const char* const* class_names,
                                     size_t num_classes, size_t num_points, uint64_t seed,
                                     pm_dataset** out);
PM_API pm_status pm_dataset_load(const char* path, pm_dataset** out);
PM_API pm_status pm_dataset_save(const pm_dataset* ds, const char* path);
PM_API void pm_dataset_free(pm_dataset* ds);

PM_API size_t pm_dataset_size(const pm_dataset* ds);
PM_API size_t pm_dataset_num_classes(const pm_dataset* ds);
/* Common point count, 0 when samples differ in size. */
PM_API size_t pm_dataset_num_points(const pm_dataset* ds);
PM_API pm_status pm_dataset_sample_info(const pm_dataset* ds, size_t index, uint32_t* label,
                                        size_t* num_points);
/* Copies n x 3 coordinates, row-major, into out (capacity in doubles). */
PM_API pm_status pm_dataset_sample_points(const pm_dataset* ds, size_t index, double* out,
                                          size_t capacity);

/* Reads an XYZ text file into a malloc'd n x 3 array; release with
 * pm_points_free. */
PM_API pm_status pm_xyz_load(const char* path, double** points, size_t* num_points);
PM_API void pm_points_free(double* points);

/* ---- training configuration ------------------------------------------- */

typedef struct pm_train_config pm_train_config;

/* profile is "full" or "desk". */
PM_API pm_status pm_train_config_create(const char* profile, pm_train_config** out);
PM_API void pm_train_config_free(pm_train_config* config);
/* Keys: variant, threshold, alpha, learning_rate, batch_size, epochs, seed,
 * augmentation, dropout, dropout_rate, profile, clip_norm, val_fraction,
 * randmask_lo, randmask_hi. Values are parsed from text. */
PM_API pm_status pm_train_config_set(pm_train_config* config, const char* key,
                                     const char* value);
PM_API pm_status pm_train_config_validate(const pm_train_config* config);
PM_API pm_status pm_train_config_to_json(const pm_train_config* config, char** out);

/* ---- models and training ---------------------------------------------- */

typedef struct pm_model pm_model;

typedef struct pm_epoch_info {
  uint32_t epoch;
  double loss;
  double ce;
  double kl;
  double train_accuracy;
  double val_accuracy; /* NaN without a held-out split */
  int improved;
} pm_epoch_info;

/* `state` is only valid during the call. */
typedef void (*pm_epoch_fn)(const pm_epoch_info* info, const pm_model* state, void* user);

/* Trains on ds. `resume` may be null. `best` receives the checkpoint with the
 * highest held-out accuracy (null when a resumed run never improved); `last`
 * the final state. Either output pointer may be null. */
PM_API pm_status pm_train(const pm_dataset* ds, const pm_train_config* config,
                          const pm_model* resume, pm_epoch_fn on_epoch, void* user,
                          pm_model** best, pm_model** last);

PM_API pm_status pm_model_load(const char* path, pm_model** out);
PM_API pm_status pm_model_save(const pm_model* model, const char* path);
PM_API pm_status pm_model_clone(const pm_model* model, pm_model** out);
PM_API void pm_model_free(pm_model* model);
PM_API size_t pm_model_num_classes(const pm_model* model);
/* Mask-head slot count, 0 for variants without a head. */
PM_API size_t pm_model_num_points(const pm_model* model);
PM_API uint32_t pm_model_epoch(const pm_model* model);
PM_API const char* pm_model_variant(const pm_model* model);
PM_API pm_status pm_model_config_json(const pm_model* model, char** out);
/* Training log as CSV text. */
PM_API pm_status pm_model_log_csv(const pm_model* model, char** out);

/* Evaluation-mode logits of one n x 3 cloud; out must hold num_classes values. */
PM_API pm_status pm_predict(const pm_model* model, const double* points, size_t num_points,
                            double* out, size_t capacity);

/* ---- evaluation -------------------------------------------------------- */

typedef struct pm_metrics pm_metrics;

PM_API pm_status pm_evaluate(const pm_model* model, const pm_dataset* ds, const size_t* top_n,
                             size_t num_top_n, pm_metrics** out);
PM_API void pm_metrics_free(pm_metrics* metrics);
PM_API double pm_metrics_accuracy(const pm_metrics* metrics);
PM_API size_t pm_metrics_num_classes(const pm_metrics* metrics);
/* NaN for an n that was not requested. */
PM_API double pm_metrics_top_n(const pm_metrics* metrics, size_t n);
PM_API double pm_metrics_class_accuracy(const pm_metrics* metrics, size_t label);
PM_API size_t pm_metrics_confusion(const pm_metrics* metrics, size_t true_label,
                                   size_t predicted);
PM_API pm_status pm_metrics_json(const pm_metrics* metrics, char** out);
/* which is "confusion", "per_class" or "top_n". */
PM_API pm_status pm_metrics_export_csv(const pm_metrics* metrics, const char* which,
                                       const char* path);

/* ---- attribution ------------------------------------------------------- */

typedef struct pm_attribution pm_attribution;

PM_API pm_status pm_attribute(const pm_model* model, const double* points, size_t num_points,
                              const double* thresholds, size_t num_thresholds,
                              pm_attribution** out);
PM_API void pm_attribution_free(pm_attribution* a);
PM_API size_t pm_attribution_count(const pm_attribution* a);
/* Points in the record, after fitting to the model's slot count. */
PM_API size_t pm_attribution_num_points(const pm_attribution* a);
PM_API double pm_attribution_threshold(const pm_attribution* a, size_t i);
PM_API size_t pm_attribution_survivors(const pm_attribution* a, size_t i);
PM_API uint32_t pm_attribution_predicted(const pm_attribution* a, size_t i);
PM_API double pm_attribution_probability(const pm_attribution* a, size_t i);
PM_API pm_status pm_attribution_mask(const pm_attribution* a, size_t i, double* out,
                                     size_t capacity);
PM_API pm_status pm_attribution_export_ply(const pm_attribution* a, size_t i, const char* path);

/* ---- experiments ------------------------------------------------------- */

typedef struct pm_bias_options {
  const size_t* levels;
  size_t num_levels;
  const char* const* variants;
  size_t num_variants;
  size_t num_classes;
  size_t train_per_class;
  size_t test_per_class;
  size_t num_points;
  const char* mode; /* "append" or "replace"; null means append */
  size_t attribution_samples;
  uint64_t seed;
} pm_bias_options;

typedef struct pm_rotation_options {
  const char* const* variants;
  size_t num_variants;
  size_t num_classes;
  size_t train_per_class;
  size_t test_per_class;
  size_t num_points;
  const size_t* top_n;
  size_t num_top_n;
  int aligned_baseline;
  uint64_t seed;
} pm_rotation_options;

/* Fills the defaults used by the CLI. */
PM_API void pm_bias_options_default(pm_bias_options* options);
PM_API void pm_rotation_options_default(pm_rotation_options* options);

/* Runs the experiment and writes its artifacts to run_dir (created if
 * missing). `summary` receives the machine-readable summary as JSON and may
 * be null. */
PM_API pm_status pm_bias_experiment(const pm_bias_options* options, const pm_train_config* base,
                                    const char* run_dir, char** summary);
PM_API pm_status pm_rotation_experiment(const pm_rotation_options* options,
                                        const pm_train_config* base, const char* run_dir,
                                        char** summary);

/* ---- numerical self-test ----------------------------------------------- */

/* Runs the finite-difference suite. *passed is 1 when every case is below
 * tolerance; `report` receives one "name max_rel_error" line per case. */
PM_API pm_status pm_gradcheck(double tolerance, uint64_t seed, int* passed, char** report);

#ifdef __cplusplus
}
#endif

#endif /* POINTMASK_POINTMASK_H_ */
