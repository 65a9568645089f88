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

#include "train/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "json.hpp"

#include "core/errors.hpp"
#include "diffcore/ops.hpp"

namespace pointmask::train {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;   // "init"
constexpr std::uint64_t kTrainStream = 0x7472616e;  // "tran"
constexpr std::uint64_t kSplitStream = 0x73706c74;  // "splt"

bool finite(double v) { return std::isfinite(v); }

std::size_t count_correct(const Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t c = logits.cols();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax(std::span<const double>(logits.data() + i * c, c)) == labels[i]) ++correct;
  }
  return correct;
}

}  // namespace

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.profile = "desk";
  c.epochs = 100;
  return c;
}

void TrainConfig::validate() const {
  mask.validate();
  if (!(learning_rate > 0.0 && finite(learning_rate))) {
    throw ConfigError("learning rate must be positive");
  }
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(alpha >= 0.0 && finite(alpha))) throw ConfigError("alpha must be non-negative");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (!(clip_norm >= 0.0 && finite(clip_norm))) throw ConfigError("clip norm must be >= 0");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  nn::WidthProfile::by_name(profile);
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["variant"] = mask::variant_name(c.mask.variant);
  j["threshold"] = c.mask.threshold;
  j["randmask_lo"] = c.mask.randmask_lo;
  j["randmask_hi"] = c.mask.randmask_hi;
  j["alpha"] = c.alpha;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["augmentation"] = data::augmentation_name(c.augmentation);
  j["dropout"] = c.dropout;
  j["dropout_rate"] = c.dropout_rate;
  j["profile"] = c.profile;
  j["clip_norm"] = c.clip_norm;
  j["val_fraction"] = c.val_fraction;
  return j.dump();
}

TrainConfig config_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TrainConfig c;
    c.mask.variant = mask::parse_variant(j.at("variant").get<std::string>());
    c.mask.threshold = j.at("threshold").get<double>();
    c.mask.randmask_lo = j.at("randmask_lo").get<double>();
    c.mask.randmask_hi = j.at("randmask_hi").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.augmentation = data::parse_augmentation(j.at("augmentation").get<std::string>());
    c.dropout = j.at("dropout").get<bool>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.profile = j.at("profile").get<std::string>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.val_fraction = j.at("val_fraction").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad training config: ") + e.what());
  }
}

void ModelParams::visit(const nn::ParamVisitor& fn) {
  if (head) mask::visit(*head, "mask", fn);
  nn::visit(classifier, "classifier", fn);
}

ModelParams init_model(const TrainConfig& config, std::size_t num_classes,
                       std::size_t num_points, Rng& rng) {
  const nn::WidthProfile profile = nn::WidthProfile::by_name(config.profile);
  ModelParams model;
  model.mask = config.mask;
  model.profile = config.profile;
  if (mask::has_mask_head(config.mask.variant)) {
    model.head = mask::init_mask_head(profile, num_points, config.mask.variant, rng);
  }
  model.classifier =
      nn::init_classifier(profile, num_classes, config.dropout ? config.dropout_rate : 0.0, rng);
  return model;
}

std::vector<NamedParam> trainable_params(ModelParams& model) {
  std::vector<NamedParam> out;
  model.visit([&](const std::string& name, Tensor& t, bool trainable) {
    if (trainable) out.push_back({name, &t});
  });
  return out;
}

Batch make_batch(std::span<const data::PointCloud> clouds, std::span<const std::size_t> labels) {
  if (clouds.empty()) throw ContractError("batch must not be empty");
  if (clouds.size() != labels.size()) throw ContractError("one label per cloud expected");
  Batch b;
  std::size_t total = 0;
  b.offsets.push_back(0);
  for (const data::PointCloud& c : clouds) {
    if (c.size() == 0) throw DomainError("empty point cloud in batch");
    total += c.size();
    b.offsets.push_back(total);
  }
  b.points = Tensor({total, 3});
  double* out = b.points.data();
  for (const data::PointCloud& c : clouds) {
    for (const data::Point3& p : c.points) {
      *out++ = p[0];
      *out++ = p[1];
      *out++ = p[2];
    }
  }
  b.labels.assign(labels.begin(), labels.end());
  return b;
}

data::PointCloud fit_to_model(const ModelParams& model, const data::PointCloud& cloud) {
  const std::size_t n = model.num_points();
  if (n == 0 || cloud.size() == n) return cloud;
  if (cloud.size() > n) {
    throw DimensionError("cloud has " + std::to_string(cloud.size()) +
                         " points but the mask head holds " + std::to_string(n));
  }
  return data::pad_cyclic(cloud, n);
}

ForwardPass forward(nn::Binder& bind, const ModelParams& model, Var points,
                    std::span<const std::size_t> offsets, const ForwardOptions& options) {
  ForwardPass pass;
  const bool train = options.mode == nn::Mode::kTrain;
  pass.mask = mask::apply_variant(bind, model.head ? &*model.head : nullptr, model.mask, points,
                                  offsets, options.mode, options.inputs,
                                  train ? &pass.head_moments : nullptr);
  pass.logits = nn::classifier_forward(bind, model.classifier, pass.mask.masked_points, offsets,
                                       options.mode, train ? &pass.classifier_moments : nullptr,
                                       options.dropout_rng);
  return pass;
}

LossResult total_loss(nn::Binder& bind, const ModelParams& model, const Batch& batch,
                      double alpha, const ForwardOptions& options) {
  if (batch.size() == 0) throw ContractError("total_loss: empty batch");
  ad::Tape& tape = bind.tape();
  LossResult r;
  r.pass = forward(bind, model, tape.constant(batch.points), batch.offsets, options);
  r.ce = ad::softmax_cross_entropy(r.pass.logits, batch.labels);
  if (model.head) {
    r.kl = mask::kl_term(r.pass.mask.mu, r.pass.mask.log_var, alpha);
  } else {
    r.kl = tape.constant(Tensor::scalar(0.0));
  }
  r.total = ad::add(r.ce, r.kl);
  r.values = {r.total.value().item(), r.ce.value().item(), r.kl.value().item()};
  return r;
}

AdamState AdamState::init(std::span<const NamedParam> params) {
  AdamState s;
  for (const NamedParam& p : params) {
    s.m.emplace_back(p.tensor->shape(), 0.0);
    s.v.emplace_back(p.tensor->shape(), 0.0);
  }
  return s;
}

void adam_step(std::span<const NamedParam> params, std::span<const Tensor> grads,
               AdamState& state, double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape& shape = params[i].tensor->shape();
    if (grads[i].shape() != shape || state.m[i].shape() != shape ||
        state.v[i].shape() != shape) {
      throw DimensionError("adam_step: shape mismatch for " + params[i].name);
    }
    if (!grads[i].all_finite()) {
      throw TrainingError("non-finite gradient in parameter " + params[i].name);
    }
  }
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* theta = params[i].tensor->data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    const double* g = grads[i].data();
    const std::size_t n = grads[i].size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      theta[k] -= learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + state.epsilon);
    }
  }
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.values()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Tensor& g : grads) {
      for (double& v : g.values()) v *= s;
    }
  }
  return norm;
}

std::vector<Tensor> collect_grads(const nn::Binder& bind, std::span<const NamedParam> params) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const NamedParam& p : params) {
    Var v = bind.find(*p.tensor);
    grads.push_back(v.valid() ? v.grad() : Tensor(p.tensor->shape(), 0.0));
  }
  return grads;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty sequence");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<Tensor> predict_logits(const ModelParams& model,
                                   std::span<const data::PointCloud> clouds, std::size_t chunk) {
  if (chunk == 0) chunk = 1;
  std::vector<Tensor> out;
  out.reserve(clouds.size());
  const std::size_t c = model.num_classes();
  for (std::size_t start = 0; start < clouds.size(); start += chunk) {
    const std::size_t end = std::min(clouds.size(), start + chunk);
    std::vector<data::PointCloud> part;
    for (std::size_t i = start; i < end; ++i) part.push_back(fit_to_model(model, clouds[i]));
    const std::vector<std::size_t> labels(part.size(), 0);
    Batch b = make_batch(part, labels);
    ad::Tape tape;
    nn::Binder bind(tape, false);
    ForwardOptions options;
    options.inputs.noise = mask::NoiseMode::kZero;
    ForwardPass pass = forward(bind, model, tape.constant(b.points), b.offsets, options);
    const Tensor& logits = pass.logits.value();
    for (std::size_t i = 0; i < part.size(); ++i) {
      out.emplace_back(Shape{c}, std::vector<double>(logits.data() + i * c,
                                                     logits.data() + (i + 1) * c));
    }
  }
  return out;
}

double accuracy(const ModelParams& model, const data::Dataset& dataset) {
  if (dataset.samples.empty()) throw DomainError("accuracy of an empty dataset");
  std::vector<data::PointCloud> clouds;
  for (const auto& s : dataset.samples) clouds.push_back(s.cloud);
  const auto logits = predict_logits(model, clouds);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (argmax(logits[i].values()) == dataset.samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.size());
}

Split split_dataset(const data::Dataset& dataset, double val_fraction, std::uint64_t seed) {
  std::map<std::uint32_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_class[dataset.samples[i].label].push_back(i);
  }
  Rng rng(derive_seed(seed, kSplitStream));
  Split split;
  for (auto& [label, indices] : by_class) {
    std::shuffle(indices.begin(), indices.end(), rng);
    auto k = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(indices.size())));
    if (val_fraction > 0.0 && k == 0 && indices.size() >= 2) k = 1;
    k = std::min(k, indices.size() - 1);
    split.val.insert(split.val.end(), indices.begin(), indices.begin() + static_cast<long>(k));
    split.train.insert(split.train.end(), indices.begin() + static_cast<long>(k), indices.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return split;
}

FitResult fit(const data::Dataset& dataset, const TrainConfig& config, const FitOptions& options) {
  config.validate();
  dataset.validate();
  if (dataset.samples.empty()) throw ConfigError("training set is empty");
  const std::size_t num_classes = dataset.num_classes();
  const std::size_t num_points = dataset.num_points();
  if (mask::has_mask_head(config.mask.variant) && num_points == 0) {
    throw ConfigError(std::string(mask::variant_name(config.mask.variant)) +
                      " needs clouds of equal size");
  }

  Checkpoint state;
  if (options.resume) {
    state = *options.resume;
    TrainConfig a = state.config, b = config;
    a.epochs = b.epochs = 0;
    if (config_to_json(a) != config_to_json(b)) {
      throw ConfigError("resume: training config differs from the checkpoint");
    }
    if (state.model.num_classes() != num_classes || state.model.num_points() !=
        (state.model.head ? num_points : 0)) {
      throw ConfigError("resume: dataset does not match the checkpoint model");
    }
    state.config = config;
  } else {
    Rng init_rng(derive_seed(config.seed, kInitStream));
    state.config = config;
    state.model = init_model(config, num_classes, num_points, init_rng);
    state.adam = AdamState::init(trainable_params(state.model));
    state.rng_state = serialize_rng(Rng(derive_seed(config.seed, kTrainStream)));
    state.class_names = dataset.class_names;
  }

  const Split split = split_dataset(dataset, config.val_fraction, config.seed);
  std::vector<data::PointCloud> val_clouds;
  for (std::size_t i : split.val) val_clouds.push_back(dataset.samples[i].cloud);

  Rng rng = deserialize_rng(state.rng_state);
  const std::vector<NamedParam> params = trainable_params(state.model);
  FitResult result;

  for (std::size_t epoch = state.epoch + 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, ce_sum = 0.0, kl_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<data::PointCloud> clouds;
      std::vector<std::size_t> labels;
      for (std::size_t k = start; k < end; ++k) {
        const data::LabeledSample& s = dataset.samples[order[k]];
        clouds.push_back(config.augmentation == data::Augmentation::kNone
                             ? s.cloud
                             : data::augment(s.cloud, config.augmentation, rng));
        labels.push_back(s.label);
      }
      const Batch batch = make_batch(clouds, labels);

      ad::Tape tape;
      nn::Binder bind(tape, true);
      ForwardOptions fo;
      fo.mode = nn::Mode::kTrain;
      fo.inputs = {mask::NoiseMode::kSample, &rng, nullptr, true};
      fo.dropout_rng = &rng;
      LossResult r = total_loss(bind, state.model, batch, config.alpha, fo);
      tape.backward(r.total);
      std::vector<Tensor> grads = collect_grads(bind, params);
      if (config.clip_norm > 0.0) clip_global_norm(grads, config.clip_norm);
      adam_step(params, grads, state.adam, config.learning_rate);
      if (state.model.head) nn::update_running_stats(state.model.head->trunk, r.pass.head_moments);
      nn::update_running_stats(state.model.classifier.trunk, r.pass.classifier_moments);

      const auto bs = static_cast<double>(batch.size());
      loss_sum += r.values.total * bs;
      ce_sum += r.values.ce * bs;
      kl_sum += r.values.kl * bs;
      correct += count_correct(r.pass.logits.value(), batch.labels);
      ++result.steps;
    }

    const auto n = static_cast<double>(order.size());
    EpochRecord rec;
    rec.epoch = static_cast<std::uint32_t>(epoch);
    rec.loss = loss_sum / n;
    rec.ce = ce_sum / n;
    rec.kl = kl_sum / n;
    rec.train_accuracy = static_cast<double>(correct) / n;
    rec.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (!val_clouds.empty()) {
      const auto logits = predict_logits(state.model, val_clouds);
      std::size_t ok = 0;
      for (std::size_t i = 0; i < logits.size(); ++i) {
        if (argmax(logits[i].values()) == dataset.samples[split.val[i]].label) ++ok;
      }
      rec.val_accuracy = static_cast<double>(ok) / static_cast<double>(logits.size());
    }

    state.epoch = rec.epoch;
    state.rng_state = serialize_rng(rng);
    state.log.push_back(rec);
    // Ties go to the later epoch; without a held-out split the latest state
    // is the selection.
    const bool improved = val_clouds.empty() || rec.val_accuracy >= state.best_val_accuracy;
    if (improved) {
      state.best_val_accuracy = rec.val_accuracy;
      state.best_epoch = rec.epoch;
      result.best = state;
    }
    if (options.on_epoch) options.on_epoch(state, improved);
  }
  result.final = std::move(state);
  return result;
}

}  // namespace pointmask::train
