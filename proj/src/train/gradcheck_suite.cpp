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


#include "train/gradcheck_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

#include "core/rng.hpp"
#include "diffcore/gradcheck.hpp"
#include "diffcore/ops.hpp"
#include "mask/mask.hpp"
#include "train/train.hpp"

namespace pointmask::train {
namespace {

constexpr double kStep = 1e-5;
constexpr std::size_t kMicroPoints = 8;
constexpr std::size_t kMicroClasses = 2;
constexpr std::size_t kCoordinatesPerTensor = 24;

// Normal entries pushed at least `gap` away from zero so relu and clamp kinks
// stay out of the finite-difference stencil.
Tensor random_tensor(const Shape& shape, Rng& rng, double gap = 0.0) {
  Tensor t(shape, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = standard_normal(rng);
    if (gap > 0.0 && std::abs(v) < gap) v = v < 0.0 ? v - gap : v + gap;
    t[i] = v;
  }
  return t;
}

Tensor positive_tensor(const Shape& shape, Rng& rng) {
  Tensor t(shape, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, 0.5, 2.0);
  return t;
}

std::vector<std::size_t> pick_coordinates(std::size_t size, Rng& rng) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (size <= kCoordinatesPerTensor) return all;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(kCoordinatesPerTensor);
  std::sort(all.begin(), all.end());
  return all;
}

class Runner {
 public:
  explicit Runner(GradCheckSuite& suite) : suite_(suite) {}

  void check(const std::string& name, const ad::ScalarFunction& f, const Tensor& x,
             const std::vector<std::size_t>& coordinates = {}) {
    const ad::GradCheckReport r = ad::grad_check_report(f, x, kStep, coordinates);
    GradCheckCase c;
    c.name = name;
    c.max_rel_error = r.max_rel_error;
    c.coordinates = coordinates.empty() ? x.size() : coordinates.size();
    c.passed = r.max_rel_error < suite_.tolerance;
    suite_.cases.push_back(std::move(c));
  }

 private:
  GradCheckSuite& suite_;
};

// Contracts a tensor-valued op to a scalar with fixed random weights so that
// every output entry contributes a distinct amount.
Var weighted_sum(Var y, const Tensor& w) {
  return ad::sum(ad::mul(y, y.tape().constant(w)));
}

void op_cases(Runner& run, Rng& rng) {
  using namespace ad;
  const Tensor a = random_tensor({5, 4}, rng);
  const Tensor b = random_tensor({4, 3}, rng);
  const Tensor c = random_tensor({5, 4}, rng);
  const Tensor w53 = random_tensor({5, 3}, rng);
  const Tensor w54 = random_tensor({5, 4}, rng);
  const Tensor w45 = random_tensor({4, 5}, rng);
  const Tensor w20 = random_tensor({20}, rng);
  const Tensor row = random_tensor({4}, rng);
  const Tensor srow = random_tensor({5}, rng);
  const Tensor bias3 = random_tensor({3}, rng);
  const Tensor kinked = random_tensor({5, 4}, rng, 0.05);
  const Tensor positive = positive_tensor({5, 4}, rng);
  const Tensor w4 = random_tensor({4}, rng);
  const Tensor w24 = random_tensor({2, 4}, rng);
  const std::vector<std::size_t> seg{0, 2, 5};

  run.check("matmul.a", [&](Tape& t, Var x) { return weighted_sum(matmul(x, t.constant(b)), w53); }, a);
  run.check("matmul.b", [&](Tape& t, Var x) { return weighted_sum(matmul(t.constant(a), x), w53); }, b);
  run.check("linear.x", [&](Tape& t, Var x) {
    return weighted_sum(linear(x, t.constant(b), t.constant(bias3)), w53);
  }, a);
  run.check("linear.weight", [&](Tape& t, Var x) {
    return weighted_sum(linear(t.constant(a), x, t.constant(bias3)), w53);
  }, b);
  run.check("linear.bias", [&](Tape& t, Var x) {
    return weighted_sum(linear(t.constant(a), t.constant(b), x), w53);
  }, bias3);
  run.check("transpose", [&](Tape&, Var x) { return weighted_sum(transpose(x), w45); }, a);
  run.check("reshape", [&](Tape&, Var x) { return weighted_sum(reshape(x, {20}), w20); }, a);
  run.check("add", [&](Tape& t, Var x) { return weighted_sum(add(x, t.constant(c)), w54); }, a);
  run.check("sub", [&](Tape& t, Var x) { return weighted_sum(sub(t.constant(c), x), w54); }, a);
  run.check("mul", [&](Tape& t, Var x) { return weighted_sum(mul(x, t.constant(c)), w54); }, a);
  run.check("mul.self", [&](Tape&, Var x) { return weighted_sum(mul(x, x), w54); }, a);
  run.check("add_scalar", [&](Tape&, Var x) { return weighted_sum(add_scalar(x, 0.7), w54); }, a);
  run.check("mul_scalar", [&](Tape&, Var x) { return weighted_sum(mul_scalar(x, -1.3), w54); }, a);
  run.check("add_row.x", [&](Tape& t, Var x) { return weighted_sum(add_row(x, t.constant(row)), w54); }, a);
  run.check("add_row.row", [&](Tape& t, Var x) { return weighted_sum(add_row(t.constant(a), x), w54); }, row);
  run.check("scale_rows.x", [&](Tape& t, Var x) {
    return weighted_sum(scale_rows(x, t.constant(srow)), w54);
  }, a);
  run.check("scale_rows.s", [&](Tape& t, Var x) {
    return weighted_sum(scale_rows(t.constant(a), x), w54);
  }, srow);
  run.check("exp", [&](Tape&, Var x) { return weighted_sum(exp(x), w54); }, a);
  run.check("log", [&](Tape&, Var x) { return weighted_sum(log(x), w54); }, positive);
  run.check("relu", [&](Tape&, Var x) { return weighted_sum(relu(x), w54); }, kinked);
  run.check("clamp", [&](Tape&, Var x) { return weighted_sum(clamp(x, -0.5, 0.5), w54); }, kinked);
  run.check("sigmoid", [&](Tape&, Var x) { return weighted_sum(sigmoid(x), w54); }, a);
  run.check("sum", [&](Tape&, Var x) { return mul_scalar(sum(x), 0.3); }, a);
  run.check("mean", [&](Tape&, Var x) { return mul_scalar(mean(x), 0.3); }, a);
  run.check("row_sum", [&](Tape&, Var x) { return weighted_sum(row_sum(x), srow); }, a);
  run.check("reduce_max", [&](Tape&, Var x) { return weighted_sum(reduce_max(x), w4); }, a);
  run.check("segment_max", [&](Tape&, Var x) { return weighted_sum(segment_max(x, seg), w24); }, a);
  run.check("softmax_cross_entropy", [&](Tape&, Var x) {
    return softmax_cross_entropy(x, std::size_t{2});
  }, row);
  const std::vector<std::size_t> labels{0, 3, 1, 1, 2};
  run.check("softmax_cross_entropy.batch", [&](Tape&, Var x) {
    return softmax_cross_entropy(x, labels);
  }, a);

  const Tensor gamma = random_tensor({4}, rng);
  const Tensor beta = random_tensor({4}, rng);
  const Tensor run_mean = random_tensor({4}, rng);
  const Tensor run_var = positive_tensor({4}, rng);
  run.check("batch_norm_train.x", [&](Tape& t, Var x) {
    return weighted_sum(batch_norm_train(x, t.constant(gamma), t.constant(beta), 1e-5), w54);
  }, a);
  run.check("batch_norm_train.scale", [&](Tape& t, Var x) {
    return weighted_sum(batch_norm_train(t.constant(a), x, t.constant(beta), 1e-5), w54);
  }, gamma);
  run.check("batch_norm_train.shift", [&](Tape& t, Var x) {
    return weighted_sum(batch_norm_train(t.constant(a), t.constant(gamma), x, 1e-5), w54);
  }, beta);
  run.check("batch_norm_eval.x", [&](Tape& t, Var x) {
    return weighted_sum(
        batch_norm_eval(x, t.constant(gamma), t.constant(beta), run_mean, run_var, 1e-5), w54);
  }, a);

  // Mask layer pieces.
  const Tensor mu = random_tensor({2, 4}, rng);
  const Tensor lv = random_tensor({2, 4}, rng);
  const Tensor eps = random_tensor({2, 4}, rng);
  run.check("reparameterize.mu", [&](Tape& t, Var x) {
    return weighted_sum(mask::reparameterize(x, t.constant(lv), eps), w24);
  }, mu);
  run.check("reparameterize.log_var", [&](Tape& t, Var x) {
    return weighted_sum(mask::reparameterize(t.constant(mu), x, eps), w24);
  }, lv);
  // Keep sigmoid(J) - t away from zero.
  Tensor j = random_tensor({2, 4}, rng);
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = std::abs(j[i]) < 0.1 ? j[i] + 0.3 : j[i];
  run.check("mask_relu", [&](Tape&, Var x) { return weighted_sum(mask::mask_relu(x, 0.5), w24); }, j);
  const Tensor pts = random_tensor({5, 3}, rng);
  run.check("apply_mask.points", [&](Tape& t, Var x) {
    return weighted_sum(mask::apply_mask(x, t.constant(srow)), w53);
  }, pts);
  run.check("apply_mask.mask", [&](Tape& t, Var x) {
    return weighted_sum(mask::apply_mask(t.constant(pts), x), w53);
  }, srow);
  run.check("pointmap_apply", [&](Tape& t, Var x) {
    return weighted_sum(mask::pointmap_apply(t.constant(pts), x), w53);
  }, w53);
  run.check("kl_term.mu", [&](Tape& t, Var x) { return mask::kl_term(x, t.constant(lv), 0.7); }, mu);
  run.check("kl_term.log_var", [&](Tape& t, Var x) { return mask::kl_term(t.constant(mu), x, 0.7); }, lv);
}

void pipeline_cases(Runner& run, mask::Variant variant, Rng& rng) {
  TrainConfig config = TrainConfig::desk();
  config.mask.variant = variant;
  config.dropout = false;
  config.alpha = 0.5;  // large enough that the KL gradient is visible next to the CE part
  ModelParams model = init_model(config, kMicroClasses, kMicroPoints, rng);
  // Zero biases put every zero-masked row exactly on a ReLU kink.
  for (const NamedParam& p : trainable_params(model)) {
    const std::string& n = p.name;
    if (n.ends_with(".bias") || n.ends_with(".shift")) {
      Tensor r = random_tensor(p.tensor->shape(), rng, 0.25);
      for (std::size_t i = 0; i < r.size(); ++i) (*p.tensor)[i] += 0.2 * r[i];
    }
  }

  Batch batch;
  batch.points = random_tensor({2 * kMicroPoints, 3}, rng);
  for (std::size_t i = 0; i < batch.points.size(); ++i) batch.points[i] *= 0.5;
  batch.offsets = {0, kMicroPoints, 2 * kMicroPoints};
  batch.labels = {0, 1};
  const Tensor eps = random_tensor({2, model.head->slots()}, rng);

  const std::string prefix = std::string("pipeline.") + std::string(mask::variant_name(variant));
  auto loss = [&](nn::Binder& bind, Var points) {
    ForwardOptions fo;
    fo.mode = nn::Mode::kEval;
    fo.inputs = {mask::NoiseMode::kFixed, nullptr, &eps, false};
    ForwardPass pass = forward(bind, model, points, batch.offsets, fo);
    Var ce = ad::softmax_cross_entropy(pass.logits, batch.labels);
    return ad::add(ce, mask::kl_term(pass.mask.mu, pass.mask.log_var, config.alpha));
  };

  run.check(prefix + ".points", [&](ad::Tape& t, Var x) {
    nn::Binder bind(t, false);
    return loss(bind, x);
  }, batch.points, pick_coordinates(batch.points.size(), rng));

  for (const NamedParam& p : trainable_params(model)) {
    const Tensor* target = p.tensor;
    run.check(prefix + "." + p.name, [&, target](ad::Tape& t, Var x) {
      nn::Binder bind(t, false);
      bind.assign(*target, x);
      return loss(bind, t.constant(batch.points));
    }, *target, pick_coordinates(target->size(), rng));
  }
}

}  // namespace

bool GradCheckSuite::passed() const {
  return !cases.empty() &&
         std::all_of(cases.begin(), cases.end(), [](const GradCheckCase& c) { return c.passed; });
}

GradCheckSuite run_gradcheck_suite(double tolerance, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckSuite suite;
  suite.tolerance = tolerance;
  Runner run(suite);
  Rng rng(derive_seed(seed, 0x67726164));
  op_cases(run, rng);
  pipeline_cases(run, mask::Variant::kPointMask, rng);
  pipeline_cases(run, mask::Variant::kPointMap, rng);
  suite.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return suite;
}

}  // namespace pointmask::train
