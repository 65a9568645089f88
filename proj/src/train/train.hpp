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

#ifndef POINTMASK_TRAIN_TRAIN_HPP_
#define POINTMASK_TRAIN_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "data/augment.hpp"
#include "data/point_cloud.hpp"
#include "mask/mask.hpp"
#include "network/network.hpp"

namespace pointmask::train {

using ad::Shape;
using ad::Tensor;
using ad::Var;

struct TrainConfig {
  mask::MaskConfig mask;
  double alpha = 1e-3;
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  data::Augmentation augmentation = data::Augmentation::kNone;
  bool dropout = true;
  double dropout_rate = 0.3;
  std::string profile = "full";
  double clip_norm = 0.0;      // global gradient norm cap; 0 disables
  double val_fraction = 0.1;   // stratified held-out share for model selection

  /// Desk-scale preset: the small width profile and 100 epochs.
  static TrainConfig desk();
  void validate() const;
};

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(std::string_view text);

struct ModelParams {
  mask::MaskConfig mask;
  std::string profile;
  std::optional<mask::MaskHeadParams> head;
  nn::ClassifierParams classifier;

  std::size_t num_classes() const { return classifier.num_classes(); }
  /// Point count the mask head was built for; 0 when there is no head.
  std::size_t num_points() const { return head ? head->num_points : 0; }

  /// Every tensor with its stable name ("mask.*", "classifier.*").
  void visit(const nn::ParamVisitor& fn);
};

ModelParams init_model(const TrainConfig& config, std::size_t num_classes,
                       std::size_t num_points, Rng& rng);

struct NamedParam {
  std::string name;
  Tensor* tensor;
};
/// Trainable tensors in visiting order.
std::vector<NamedParam> trainable_params(ModelParams& model);

/// Clouds stacked into one [sum n x 3] matrix.
struct Batch {
  Tensor points;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};
Batch make_batch(std::span<const data::PointCloud> clouds, std::span<const std::size_t> labels);

/// Fits a cloud to the model's input contract. Mask heads have a fixed slot
/// count: smaller clouds are padded cyclically, larger ones are rejected.
data::PointCloud fit_to_model(const ModelParams& model, const data::PointCloud& cloud);

struct ForwardOptions {
  nn::Mode mode = nn::Mode::kEval;
  mask::VariantInputs inputs;
  Rng* dropout_rng = nullptr;
};

struct ForwardPass {
  Var logits;  // [B x C]
  mask::MaskOutput mask;
  std::vector<nn::BatchMoments> head_moments;
  std::vector<nn::BatchMoments> classifier_moments;
};

ForwardPass forward(nn::Binder& bind, const ModelParams& model, Var points,
                    std::span<const std::size_t> offsets, const ForwardOptions& options);

struct LossComponents {
  double total = 0.0;
  double ce = 0.0;
  double kl = 0.0;
};

struct LossResult {
  Var total;
  Var ce;
  Var kl;
  LossComponents values;
  ForwardPass pass;
};

/// Batch-mean cross-entropy of the classifier on the masked input plus the KL
/// regularizer. The KL part is a constant 0 for variants without a mask head.
LossResult total_loss(nn::Binder& bind, const ModelParams& model, const Batch& batch,
                      double alpha, const ForwardOptions& options);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(std::span<const NamedParam> params);
};

/// One bias-corrected Adam update. Throws TrainingError naming the parameter
/// when a gradient is not finite.
void adam_step(std::span<const NamedParam> params, std::span<const Tensor> grads,
               AdamState& state, double learning_rate);

/// Rescales grads so their global L2 norm is at most max_norm; returns the
/// norm before clipping.
double clip_global_norm(std::vector<Tensor>& grads, double max_norm);

/// Gradient of every parameter after tape.backward; zeros for parameters the
/// loss did not touch.
std::vector<Tensor> collect_grads(const nn::Binder& bind, std::span<const NamedParam> params);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Evaluation-mode logits [C] per cloud with eps = 0.
std::vector<Tensor> predict_logits(const ModelParams& model,
                                   std::span<const data::PointCloud> clouds,
                                   std::size_t chunk = 32);
double accuracy(const ModelParams& model, const data::Dataset& dataset);

struct EpochRecord {
  std::uint32_t epoch = 0;  // 1-based
  double loss = 0.0;
  double ce = 0.0;
  double kl = 0.0;
  double train_accuracy = 0.0;  // on the fly, training mode
  double val_accuracy = 0.0;    // NaN without a held-out split
};

struct Checkpoint {
  TrainConfig config;
  ModelParams model;
  AdamState adam;
  std::string rng_state;
  std::uint32_t epoch = 0;  // completed epochs
  std::vector<std::string> class_names;
  std::vector<EpochRecord> log;
  double best_val_accuracy = -1.0;
  std::uint32_t best_epoch = 0;
};

/// Stratified held-out split: indices of the training and validation parts.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
Split split_dataset(const data::Dataset& dataset, double val_fraction, std::uint64_t seed);

struct FitOptions {
  const Checkpoint* resume = nullptr;
  /// Called after every epoch with the current state; `improved` marks a new
  /// best held-out accuracy.
  std::function<void(const Checkpoint& state, bool improved)> on_epoch;
};

struct FitResult {
  std::optional<Checkpoint> best;  // empty when a resumed run never improved
  Checkpoint final;
  std::size_t steps = 0;           // optimizer steps taken by this call
};

FitResult fit(const data::Dataset& dataset, const TrainConfig& config,
              const FitOptions& options = {});

}  // namespace pointmask::train

#endif  // POINTMASK_TRAIN_TRAIN_HPP_
