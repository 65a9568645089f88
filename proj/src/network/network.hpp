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

#ifndef POINTMASK_NETWORK_NETWORK_HPP_
#define POINTMASK_NETWORK_NETWORK_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/rng.hpp"
#include "diffcore/tape.hpp"
#include "diffcore/tensor.hpp"

namespace pointmask::nn {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

enum class Mode { kTrain, kEval };

struct DenseLayerParams {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]
};

struct BatchNormParams {
  Tensor scale;
  Tensor shift;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;
};

/// One shared per-point layer: dense, batch norm, ReLU.
struct SharedMlpLayer {
  DenseLayerParams dense;
  BatchNormParams norm;
};

using SharedMlp = std::vector<SharedMlpLayer>;

/// Layer widths of the per-point trunk and of the hidden head layers.
struct WidthProfile {
  std::string name;
  std::vector<std::size_t> trunk;
  std::vector<std::size_t> head;

  static WidthProfile full();
  static WidthProfile desk();
  static WidthProfile by_name(std::string_view name);

  std::size_t feature_width() const { return trunk.back(); }
};

struct ClassifierParams {
  SharedMlp trunk;
  std::vector<DenseLayerParams> head;  // last layer emits the logits
  double dropout_rate = 0.3;

  std::size_t num_classes() const { return head.back().bias.size(); }
};

/// Column statistics of one batch-norm layer on one forward pass.
struct BatchMoments {
  Tensor mean;
  Tensor var;
  std::size_t rows = 0;
};

/// Places parameter tensors on a tape, once per tensor. Trainable binders
/// create gradient-tracking leaves; frozen ones create constants.
class Binder {
 public:
  Binder(Tape& tape, bool trainable) : tape_(&tape), trainable_(trainable) {}

  Var operator()(const Tensor& param);
  /// The leaf created for `param`, or an invalid Var if it was never bound.
  Var find(const Tensor& param) const;
  /// Uses `v` for every later binding of `param`.
  void assign(const Tensor& param, Var v) { bound_[&param] = v; }

  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_;
  bool trainable_;
  std::unordered_map<const Tensor*, Var> bound_;
};

/// Applies dense + BN + ReLU per point row of x[N x d_in]. In training mode
/// the per-layer batch moments are appended to `moments` when non-null.
Var shared_mlp_forward(Binder& bind, const SharedMlp& layers, Var points, Mode mode,
                       std::vector<BatchMoments>* moments = nullptr);

/// Running-statistics update from the moments of one training pass.
void update_running_stats(SharedMlp& layers, std::span<const BatchMoments> moments);

/// Dropout keep-mask with inverted scaling; all ones when rate is zero.
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

/// logits[S x C] = head(segment_max(trunk(points))) for the point segments
/// delimited by `offsets`. Dropout before the last layer is active only in
/// training mode and draws from `dropout_rng`.
Var classifier_forward(Binder& bind, const ClassifierParams& params, Var points,
                       std::span<const std::size_t> offsets, Mode mode,
                       std::vector<BatchMoments>* moments = nullptr,
                       Rng* dropout_rng = nullptr);

/// Evaluation-mode logits [C] for a single cloud given as [n x 3].
Tensor classify(const ClassifierParams& params, const Tensor& points);

DenseLayerParams init_dense(std::size_t in, std::size_t out, Rng& rng);
SharedMlp init_shared_mlp(std::size_t in, std::span<const std::size_t> widths, Rng& rng);
ClassifierParams init_classifier(const WidthProfile& profile, std::size_t num_classes,
                                 double dropout_rate, Rng& rng);

/// Visits every tensor with a stable dotted name. `trainable` is false for
/// batch-norm running buffers.
using ParamVisitor = std::function<void(const std::string& name, Tensor& tensor, bool trainable)>;
void visit(SharedMlp& layers, const std::string& prefix, const ParamVisitor& fn);
void visit(ClassifierParams& params, const std::string& prefix, const ParamVisitor& fn);

/// Stacks equally shaped point clouds given as [n_i x 3] into one [sum n_i x 3]
/// matrix and returns the segment offsets.
Tensor stack_rows(std::span<const Tensor> clouds, std::vector<std::size_t>& offsets);

}  // namespace pointmask::nn

#endif  // POINTMASK_NETWORK_NETWORK_HPP_
