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

#include "network/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "diffcore/ops.hpp"

namespace pointmask::nn {

WidthProfile WidthProfile::full() { return {"full", {64, 128, 1024}, {512, 256}}; }

WidthProfile WidthProfile::desk() { return {"desk", {32, 64, 256}, {64}}; }

WidthProfile WidthProfile::by_name(std::string_view name) {
  if (name == "full") return full();
  if (name == "desk") return desk();
  throw ConfigError("unknown width profile '" + std::string(name) + "' (expected full|desk)");
}

Var Binder::operator()(const Tensor& param) {
  auto it = bound_.find(&param);
  if (it != bound_.end()) return it->second;
  Var v = trainable_ ? tape_->variable(param) : tape_->constant(param);
  bound_.emplace(&param, v);
  return v;
}

Var Binder::find(const Tensor& param) const {
  auto it = bound_.find(&param);
  return it == bound_.end() ? Var{} : it->second;
}

Var shared_mlp_forward(Binder& bind, const SharedMlp& layers, Var points, Mode mode,
                       std::vector<BatchMoments>* moments) {
  if (points.value().rank() != 2 || points.value().rows() == 0) {
    throw DomainError("shared_mlp_forward: expected a non-empty [n x d] point matrix");
  }
  if (layers.empty()) return points;
  if (points.value().cols() != layers.front().dense.weight.rows()) {
    throw DimensionError("shared_mlp_forward: input width " +
                         std::to_string(points.value().cols()) + " does not match first layer " +
                         std::to_string(layers.front().dense.weight.rows()));
  }
  Var h = points;
  for (const SharedMlpLayer& layer : layers) {
    h = ad::linear(h, bind(layer.dense.weight), bind(layer.dense.bias));
    const BatchNormParams& bn = layer.norm;
    if (mode == Mode::kTrain) {
      BatchMoments m;
      m.rows = h.value().rows();
      h = ad::batch_norm_train(h, bind(bn.scale), bind(bn.shift), bn.epsilon, &m.mean, &m.var);
      if (moments) moments->push_back(std::move(m));
    } else {
      h = ad::batch_norm_eval(h, bind(bn.scale), bind(bn.shift), bn.running_mean,
                              bn.running_var, bn.epsilon);
    }
    h = ad::relu(h);
  }
  return h;
}

void update_running_stats(SharedMlp& layers, std::span<const BatchMoments> moments) {
  if (moments.size() != layers.size()) {
    throw ContractError("update_running_stats: one moment record per layer expected");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    BatchNormParams& bn = layers[l].norm;
    const BatchMoments& m = moments[l];
    const double unbias =
        m.rows > 1 ? static_cast<double>(m.rows) / static_cast<double>(m.rows - 1) : 1.0;
    for (std::size_t c = 0; c < bn.running_mean.size(); ++c) {
      bn.running_mean[c] = bn.momentum * bn.running_mean[c] + (1.0 - bn.momentum) * m.mean[c];
      bn.running_var[c] =
          bn.momentum * bn.running_var[c] + (1.0 - bn.momentum) * m.var[c] * unbias;
    }
  }
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
  Tensor mask(shape, 1.0);
  if (rate == 0.0) return mask;
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (double& v : mask.values()) v = keep(rng) ? scale : 0.0;
  return mask;
}

Var classifier_forward(Binder& bind, const ClassifierParams& params, Var points,
                       std::span<const std::size_t> offsets, Mode mode,
                       std::vector<BatchMoments>* moments, Rng* dropout_rng) {
  Var features = shared_mlp_forward(bind, params.trunk, points, mode, moments);
  Var h = ad::segment_max(features, offsets);
  for (std::size_t l = 0; l < params.head.size(); ++l) {
    const bool last = l + 1 == params.head.size();
    if (last && mode == Mode::kTrain && params.dropout_rate > 0.0) {
      if (!dropout_rng) throw ContractError("classifier_forward: dropout needs an rng");
      h = ad::mul(h, h.tape().constant(
                         dropout_mask(h.value().shape(), params.dropout_rate, *dropout_rng)));
    }
    h = ad::linear(h, bind(params.head[l].weight), bind(params.head[l].bias));
    if (!last) h = ad::relu(h);
  }
  return h;
}

Tensor classify(const ClassifierParams& params, const Tensor& points) {
  Tape tape;
  Binder bind(tape, false);
  const std::size_t offsets[] = {0, points.rows()};
  Var logits = classifier_forward(bind, params, tape.constant(points), offsets, Mode::kEval);
  return logits.value().reshaped({params.num_classes()});
}

DenseLayerParams init_dense(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayerParams layer{Tensor({in, out}), Tensor({out}, 0.0)};
  for (double& w : layer.weight.values()) w = dist(rng);
  return layer;
}

SharedMlp init_shared_mlp(std::size_t in, std::span<const std::size_t> widths, Rng& rng) {
  SharedMlp layers;
  std::size_t width = in;
  for (std::size_t out : widths) {
    SharedMlpLayer layer;
    layer.dense = init_dense(width, out, rng);
    layer.norm.scale = Tensor({out}, 1.0);
    layer.norm.shift = Tensor({out}, 0.0);
    layer.norm.running_mean = Tensor({out}, 0.0);
    layer.norm.running_var = Tensor({out}, 1.0);
    layers.push_back(std::move(layer));
    width = out;
  }
  return layers;
}

ClassifierParams init_classifier(const WidthProfile& profile, std::size_t num_classes,
                                 double dropout_rate, Rng& rng) {
  if (num_classes < 2) throw ConfigError("classifier needs at least 2 classes");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (profile.trunk.empty()) throw ConfigError("width profile has an empty trunk");
  ClassifierParams params;
  params.dropout_rate = dropout_rate;
  params.trunk = init_shared_mlp(3, profile.trunk, rng);
  std::size_t width = profile.feature_width();
  for (std::size_t out : profile.head) {
    params.head.push_back(init_dense(width, out, rng));
    width = out;
  }
  params.head.push_back(init_dense(width, num_classes, rng));
  return params;
}

void visit(SharedMlp& layers, const std::string& prefix, const ParamVisitor& fn) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = prefix + "." + std::to_string(l);
    fn(p + ".weight", layers[l].dense.weight, true);
    fn(p + ".bias", layers[l].dense.bias, true);
    fn(p + ".bn.scale", layers[l].norm.scale, true);
    fn(p + ".bn.shift", layers[l].norm.shift, true);
    fn(p + ".bn.running_mean", layers[l].norm.running_mean, false);
    fn(p + ".bn.running_var", layers[l].norm.running_var, false);
  }
}

void visit(ClassifierParams& params, const std::string& prefix, const ParamVisitor& fn) {
  visit(params.trunk, prefix + ".trunk", fn);
  for (std::size_t l = 0; l < params.head.size(); ++l) {
    const std::string p = prefix + ".head." + std::to_string(l);
    fn(p + ".weight", params.head[l].weight, true);
    fn(p + ".bias", params.head[l].bias, true);
  }
}

Tensor stack_rows(std::span<const Tensor> clouds, std::vector<std::size_t>& offsets) {
  offsets.assign(1, 0);
  if (clouds.empty()) throw DomainError("stack_rows: no clouds");
  const std::size_t d = clouds.front().cols();
  std::size_t total = 0;
  for (const Tensor& c : clouds) {
    if (c.cols() != d) throw DimensionError("stack_rows: inconsistent point widths");
    total += c.rows();
    offsets.push_back(total);
  }
  Tensor out({total, d});
  std::size_t at = 0;
  for (const Tensor& c : clouds) {
    std::copy(c.values().begin(), c.values().end(), out.values().begin() + at);
    at += c.size();
  }
  return out;
}

}  // namespace pointmask::nn
