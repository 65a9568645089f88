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

#ifndef POINTMASK_MASK_MASK_HPP_
#define POINTMASK_MASK_MASK_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "network/network.hpp"

// The variational masking layer that sits in front of the classifier.
//
// A mask head maps the whole cloud to one Gaussian (mu, log_var) per point
// slot. A sample J = mu + exp(log_var / 2) * eps is either squashed into a
// multiplicative mask M = clamp(relu(sigmoid(J) - t), 0, 1) (PointMask) or
// added to the coordinates as a translation (PointMap). The KL term against a
// standard normal prior limits how much the mask may depend on the input.
//
// Slots are tied to point indices: the head emits a fixed-width vector from a
// pooled global feature, so permuting the input does not permute the mask.
namespace pointmask::mask {

using ad::Shape;
using ad::Tensor;
using ad::Var;

enum class Variant { kPointMask, kPointMap, kRandMask, kBaseline };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
/// True for the variants that own a mask head.
bool has_mask_head(Variant v);

struct MaskConfig {
  Variant variant = Variant::kPointMask;
  double threshold = 0.5;
  double randmask_lo = 10.0;  // percent
  double randmask_hi = 70.0;

  void validate() const;
};

struct MaskHeadParams {
  nn::SharedMlp trunk;
  nn::DenseLayerParams mu_head;
  nn::DenseLayerParams logvar_head;
  std::size_t num_points = 0;
  std::size_t slot_dims = 1;  // 1 for PointMask, 3 for PointMap

  std::size_t slots() const { return num_points * slot_dims; }
};

/// Initial bias of the log-variance head; sigma starts near 0.37.
inline constexpr double kInitialLogVar = -2.0;

MaskHeadParams init_mask_head(const nn::WidthProfile& profile, std::size_t num_points,
                              Variant variant, Rng& rng);
void visit(MaskHeadParams& params, const std::string& prefix, const nn::ParamVisitor& fn);

struct Gaussian {
  Var mu;       // [S x slots]
  Var log_var;  // [S x slots]
};

/// Pooled trunk feature of each segment mapped to per-slot mu and log_var.
/// Every segment must hold exactly `params.num_points` points.
Gaussian mask_head_forward(nn::Binder& bind, const MaskHeadParams& params, Var points,
                           std::span<const std::size_t> offsets, nn::Mode mode,
                           std::vector<nn::BatchMoments>* moments = nullptr);

/// Standard normal draws of the given shape.
Tensor draw_noise(const Shape& shape, Rng& rng);

/// J = mu + exp(0.5 * log_var) * eps with eps held constant.
Var reparameterize(Var mu, Var log_var, const Tensor& eps);

struct Reparameterized {
  Var j;
  Tensor eps;
};
Reparameterized reparameterize(Var mu, Var log_var, Rng& rng);

/// clamp(relu(sigmoid(J) - threshold), 0, 1). Threshold must lie in [0, 1).
Var mask_relu(Var j, double threshold);
double mask_relu(double j, double threshold);

/// Row i of points[n x 3] scaled by m[i].
Var apply_mask(Var points, Var m);
/// points + J for J of shape [n x 3].
Var pointmap_apply(Var points, Var j);

/// Zeroes floor(p * n / 100) distinct rows chosen uniformly, p ~ U[lo, hi].
Tensor rand_mask(const Tensor& points, double lo, double hi, Rng& rng);

/// alpha * mean over rows of -0.5 * sum(1 + log_var - mu^2 - exp(log_var)):
/// the closed-form KL to N(0, I). Rank-1 inputs are a single row.
Var kl_term(Var mu, Var log_var, double alpha);

/// Everything one masked forward pass produced.
struct MaskOutput {
  Var mu;       // invalid for baseline and randmask
  Var log_var;
  Tensor eps;   // the noise actually used
  Var j;
  Var m;        // [N] for PointMask, [N x 3] for PointMap
  Var masked_points;
};

enum class NoiseMode {
  kSample,  // fresh eps from the rng
  kZero,    // eps = 0, so J = mu
  kFixed,   // caller-provided eps
};

struct VariantInputs {
  NoiseMode noise = NoiseMode::kZero;
  Rng* rng = nullptr;            // eps draws and rand-mask selection
  const Tensor* fixed_eps = nullptr;
  bool apply_rand_mask = false;  // randmask is active during training only
};

/// Runs the configured variant on stacked points [N x 3].
MaskOutput apply_variant(nn::Binder& bind, const MaskHeadParams* head, const MaskConfig& config,
                         Var points, std::span<const std::size_t> offsets, nn::Mode mode,
                         const VariantInputs& inputs,
                         std::vector<nn::BatchMoments>* moments = nullptr);

}  // namespace pointmask::mask

#endif  // POINTMASK_MASK_MASK_HPP_
