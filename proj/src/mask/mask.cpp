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

#include "mask/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/errors.hpp"
#include "diffcore/ops.hpp"

namespace pointmask::mask {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kPointMask: return "pointmask";
    case Variant::kPointMap: return "pointmap";
    case Variant::kRandMask: return "randmask";
    case Variant::kBaseline: return "baseline";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::kPointMask, Variant::kPointMap, Variant::kRandMask,
                    Variant::kBaseline}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected pointmask|pointmap|randmask|baseline)");
}

bool has_mask_head(Variant v) { return v == Variant::kPointMask || v == Variant::kPointMap; }

void MaskConfig::validate() const {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in [0, 1), got " + std::to_string(threshold));
  }
  if (!(randmask_lo >= 0.0 && randmask_lo <= randmask_hi && randmask_hi <= 100.0)) {
    throw ConfigError("randmask range must satisfy 0 <= lo <= hi <= 100");
  }
}

MaskHeadParams init_mask_head(const nn::WidthProfile& profile, std::size_t num_points,
                              Variant variant, Rng& rng) {
  if (!has_mask_head(variant)) {
    throw VariantError(std::string(variant_name(variant)) + " has no mask head");
  }
  if (num_points == 0) throw ConfigError("mask head needs a positive point count");
  MaskHeadParams params;
  params.num_points = num_points;
  params.slot_dims = variant == Variant::kPointMap ? 3 : 1;
  params.trunk = nn::init_shared_mlp(3, profile.trunk, rng);
  params.mu_head = nn::init_dense(profile.feature_width(), params.slots(), rng);
  params.logvar_head = nn::init_dense(profile.feature_width(), params.slots(), rng);
  params.logvar_head.bias.fill(kInitialLogVar);
  return params;
}

void visit(MaskHeadParams& params, const std::string& prefix, const nn::ParamVisitor& fn) {
  nn::visit(params.trunk, prefix + ".trunk", fn);
  fn(prefix + ".mu.weight", params.mu_head.weight, true);
  fn(prefix + ".mu.bias", params.mu_head.bias, true);
  fn(prefix + ".logvar.weight", params.logvar_head.weight, true);
  fn(prefix + ".logvar.bias", params.logvar_head.bias, true);
}

Gaussian mask_head_forward(nn::Binder& bind, const MaskHeadParams& params, Var points,
                           std::span<const std::size_t> offsets, nn::Mode mode,
                           std::vector<nn::BatchMoments>* moments) {
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t n = offsets[s + 1] - offsets[s];
    if (n != params.num_points) {
      throw DimensionError("mask head expects " + std::to_string(params.num_points) +
                           " points per cloud, got " + std::to_string(n));
    }
  }
  Var features = nn::shared_mlp_forward(bind, params.trunk, points, mode, moments);
  Var pooled = ad::segment_max(features, offsets);
  Var mu = ad::linear(pooled, bind(params.mu_head.weight), bind(params.mu_head.bias));
  Var log_var =
      ad::linear(pooled, bind(params.logvar_head.weight), bind(params.logvar_head.bias));
  return {mu, log_var};
}

Tensor draw_noise(const Shape& shape, Rng& rng) {
  Tensor eps(shape);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : eps.values()) v = normal(rng);
  return eps;
}

Var reparameterize(Var mu, Var log_var, const Tensor& eps) {
  if (mu.shape() != log_var.shape() || mu.shape() != eps.shape()) {
    throw DimensionError("reparameterize: mu, log_var and eps shapes differ");
  }
  ad::Tape& tape = mu.tape();
  Var sigma = ad::exp(ad::mul_scalar(log_var, 0.5));
  return ad::add(mu, ad::mul(sigma, tape.constant(eps)));
}

Reparameterized reparameterize(Var mu, Var log_var, Rng& rng) {
  Tensor eps = draw_noise(mu.shape(), rng);
  Var j = reparameterize(mu, log_var, eps);
  return {j, std::move(eps)};
}

Var mask_relu(Var j, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw DomainError("mask threshold must lie in [0, 1)");
  }
  return ad::clamp(ad::relu(ad::add_scalar(ad::sigmoid(j), -threshold)), 0.0, 1.0);
}

double mask_relu(double j, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw DomainError("mask threshold must lie in [0, 1)");
  }
  return std::clamp(std::max(ad::stable_sigmoid(j) - threshold, 0.0), 0.0, 1.0);
}

Var apply_mask(Var points, Var m) {
  if (m.value().size() != points.value().rows()) {
    throw DimensionError("apply_mask: " + std::to_string(m.value().size()) +
                         " mask values for " + std::to_string(points.value().rows()) +
                         " points");
  }
  return ad::scale_rows(points, m);
}

Var pointmap_apply(Var points, Var j) {
  if (j.shape() != points.shape()) {
    throw DimensionError("pointmap_apply: translation " + ad::shape_string(j.shape()) +
                         " does not match points " + ad::shape_string(points.shape()));
  }
  return ad::add(points, j);
}

Tensor rand_mask(const Tensor& points, double lo, double hi, Rng& rng) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 100.0)) {
    throw DomainError("rand_mask: range must satisfy 0 <= lo <= hi <= 100");
  }
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const double percent = lo == hi ? lo : uniform(rng, lo, hi);
  const auto count = std::min(
      n, static_cast<std::size_t>(std::floor(percent * static_cast<double>(n) / 100.0)));
  // Partial Fisher-Yates: the first `count` entries are a uniform sample
  // without replacement.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  Tensor out = points;
  for (std::size_t i = 0; i < count; ++i) {
    std::fill_n(out.data() + order[i] * d, d, 0.0);
  }
  return out;
}

Var kl_term(Var mu, Var log_var, double alpha) {
  if (mu.shape() != log_var.shape()) throw DimensionError("kl_term: mu and log_var differ");
  if (!(alpha >= 0.0)) throw DomainError("kl_term: alpha must be non-negative");
  if (mu.value().rank() == 1) {
    const Shape row{1, mu.value().size()};
    mu = ad::reshape(mu, row);
    log_var = ad::reshape(log_var, row);
  }
  Var inner = ad::sub(ad::sub(ad::add_scalar(log_var, 1.0), ad::mul(mu, mu)), ad::exp(log_var));
  return ad::mul_scalar(ad::mean(ad::row_sum(inner)), -0.5 * alpha);
}

MaskOutput apply_variant(nn::Binder& bind, const MaskHeadParams* head, const MaskConfig& config,
                         Var points, std::span<const std::size_t> offsets, nn::Mode mode,
                         const VariantInputs& inputs, std::vector<nn::BatchMoments>* moments) {
  MaskOutput out;
  ad::Tape& tape = points.tape();
  switch (config.variant) {
    case Variant::kBaseline:
      out.masked_points = points;
      return out;
    case Variant::kRandMask: {
      if (!inputs.apply_rand_mask) {
        out.masked_points = points;
        return out;
      }
      if (!inputs.rng) throw ContractError("rand mask needs an rng");
      const Tensor& all = points.value();
      Tensor masked(all.shape());
      const std::size_t d = all.cols();
      for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        const std::size_t n = offsets[s + 1] - offsets[s];
        Tensor cloud({n, d}, std::vector<double>(all.data() + offsets[s] * d,
                                                 all.data() + offsets[s + 1] * d));
        Tensor dropped = rand_mask(cloud, config.randmask_lo, config.randmask_hi, *inputs.rng);
        std::copy(dropped.values().begin(), dropped.values().end(),
                  masked.data() + offsets[s] * d);
      }
      out.masked_points = tape.constant(std::move(masked));
      return out;
    }
    case Variant::kPointMask:
    case Variant::kPointMap:
      break;
  }
  if (!head) throw ContractError("variant needs mask head parameters");
  Gaussian g = mask_head_forward(bind, *head, points, offsets, mode, moments);
  out.mu = g.mu;
  out.log_var = g.log_var;
  switch (inputs.noise) {
    case NoiseMode::kZero:
      out.eps = Tensor(g.mu.shape(), 0.0);
      break;
    case NoiseMode::kSample:
      if (!inputs.rng) throw ContractError("noise sampling needs an rng");
      out.eps = draw_noise(g.mu.shape(), *inputs.rng);
      break;
    case NoiseMode::kFixed:
      if (!inputs.fixed_eps) throw ContractError("fixed noise mode needs eps");
      out.eps = *inputs.fixed_eps;
      break;
  }
  out.j = reparameterize(g.mu, g.log_var, out.eps);
  const std::size_t rows = points.value().rows();
  if (config.variant == Variant::kPointMask) {
    out.m = mask_relu(ad::reshape(out.j, Shape{rows}), config.threshold);
    out.masked_points = apply_mask(points, out.m);
  } else {
    out.m = ad::reshape(out.j, Shape{rows, 3});
    out.masked_points = pointmap_apply(points, out.m);
  }
  return out;
}

}  // namespace pointmask::mask
