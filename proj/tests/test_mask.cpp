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


#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "mask/mask.hpp"

namespace pointmask::mask {
namespace {

using ad::Tape;

double kl(const Tensor& mu, const Tensor& lv, double alpha) {
  Tape tape;
  return kl_term(tape.constant(mu), tape.constant(lv), alpha).value().item();
}

TEST(KlTerm, PriorMatchIsZero) {
  EXPECT_EQ(kl(Tensor({4}, 0.0), Tensor({4}, 0.0), 1.0), 0.0);
  EXPECT_NEAR(kl(Tensor({4}, 0.0), Tensor({4}, 0.0), 1.0), 0.0, 1e-12);
}

TEST(KlTerm, ClosedFormValues) {
  EXPECT_NEAR(kl(Tensor::vector({1.0}), Tensor::vector({0.0}), 1.0), 0.5, 1e-9);
  // 0.5 * (4 - 1 - ln 4)
  EXPECT_NEAR(kl(Tensor::vector({0.0}), Tensor::vector({std::log(4.0)}), 1.0),
              0.8068528194400547, 1e-9);
}

TEST(KlTerm, AlphaScalesAndRowsAverage) {
  const double one = kl(Tensor::vector({1.0}), Tensor::vector({0.0}), 1.0);
  EXPECT_NEAR(kl(Tensor::vector({1.0}), Tensor::vector({0.0}), 1e-3), 1e-3 * one, 1e-15);
  // Two rows: 0.5 and 0 average to 0.25.
  EXPECT_NEAR(kl(Tensor::matrix({{1.0}, {0.0}}), Tensor::matrix({{0.0}, {0.0}}), 1.0), 0.25,
              1e-12);
}

TEST(KlTerm, Errors) {
  EXPECT_THROW(kl(Tensor({2}, 0.0), Tensor({3}, 0.0), 1.0), DimensionError);
  EXPECT_THROW(kl(Tensor({2}, 0.0), Tensor({2}, 0.0), -1.0), DomainError);
}

TEST(Reparameterize, ZeroNoiseIsMean) {
  Tape tape;
  auto j = reparameterize(tape.constant(Tensor::vector({0.3, -2.0})),
                          tape.constant(Tensor::vector({1.0, -4.0})), Tensor({2}, 0.0));
  EXPECT_EQ(j.value(), Tensor::vector({0.3, -2.0}));
}

TEST(Reparameterize, UnitSigma) {
  Tape tape;
  auto j = reparameterize(tape.constant(Tensor::vector({0.0})), tape.constant(Tensor::vector({0.0})),
                          Tensor::vector({1.5}));
  EXPECT_EQ(j.value().item(), 1.5);
}

TEST(Reparameterize, SampleStatistics) {
  const std::size_t n = 100000;
  const double mu = 0.7, lv = std::log(2.5);
  Tape tape;
  Rng rng(21);
  auto r = reparameterize(tape.constant(Tensor({n}, mu)), tape.constant(Tensor({n}, lv)), rng);
  double m = 0.0, v = 0.0;
  for (std::size_t i = 0; i < n; ++i) m += r.j.value()[i];
  m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) v += std::pow(r.j.value()[i] - m, 2);
  v /= static_cast<double>(n - 1);
  const double var = std::exp(lv);
  EXPECT_LT(std::abs(m - mu), 4.0 * std::sqrt(var / n));
  // Standard error of the sample variance of a Gaussian: var * sqrt(2 / (n - 1)).
  EXPECT_LT(std::abs(v - var), 4.0 * var * std::sqrt(2.0 / (n - 1)));
}

TEST(Reparameterize, ShapeMismatch) {
  Tape tape;
  EXPECT_THROW(reparameterize(tape.constant(Tensor({2}, 0.0)), tape.constant(Tensor({3}, 0.0)),
                              Tensor({2}, 0.0)),
               DimensionError);
}

TEST(MaskRelu, Values) {
  EXPECT_EQ(mask_relu(0.0, 0.5), 0.0);
  EXPECT_NEAR(mask_relu(std::log(9.0), 0.5), 0.4, 1e-15);
  EXPECT_NEAR(mask_relu(1e3, 0.3), 0.7, 1e-15);
  EXPECT_NEAR(mask_relu(0.8, 0.0), 1.0 / (1.0 + std::exp(-0.8)), 1e-15);
  EXPECT_THROW(mask_relu(0.0, 1.0), DomainError);
  EXPECT_THROW(mask_relu(0.0, -0.1), DomainError);
}

TEST(MaskRelu, VarMatchesScalar) {
  Tape tape;
  const Tensor j = Tensor::vector({-3.0, 0.0, 0.4, std::log(9.0), 20.0});
  const Tensor m = mask_relu(tape.constant(j), 0.25).value();
  for (std::size_t i = 0; i < j.size(); ++i) EXPECT_EQ(m[i], mask_relu(j[i], 0.25));
}

TEST(MaskRelu, RandomContracts) {
  Rng rng(22);
  const std::vector<double> thresholds{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
  for (int trial = 0; trial < 10000; ++trial) {
    const double j = uniform(rng, -12.0, 12.0);
    const double t = uniform(rng, 0.0, 0.999);
    const double m = mask_relu(j, t);
    ASSERT_GE(m, 0.0);
    ASSERT_LE(m, 1.0 - t + 1e-15);
  }
  // Survivor counts over one random J vector fall as the threshold rises.
  Tensor j({1000});
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = uniform(rng, -6.0, 6.0);
  std::size_t previous = j.size() + 1;
  for (double t : thresholds) {
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < j.size(); ++i) survivors += mask_relu(j[i], t) > 0.0;
    EXPECT_LE(survivors, previous);
    previous = survivors;
  }
}

TEST(ApplyMask, Values) {
  Tape tape;
  auto p = tape.constant(Tensor::matrix({{1, 2, 3}, {4, 5, 6}}));
  EXPECT_EQ(apply_mask(p, tape.constant(Tensor::vector({1, 0}))).value(),
            Tensor::matrix({{1, 2, 3}, {0, 0, 0}}));
  EXPECT_EQ(apply_mask(p, tape.constant(Tensor({2}, 0.0))).value(), Tensor({2, 3}, 0.0));
  const Tensor scaled = apply_mask(p, tape.constant(Tensor({2}, 0.4))).value();
  for (std::size_t r = 0; r < 2; ++r) {
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      n0 += std::pow(p.value().at(r, c), 2);
      n1 += std::pow(scaled.at(r, c), 2);
    }
    EXPECT_NEAR(std::sqrt(n1), 0.4 * std::sqrt(n0), 1e-14);
  }
  EXPECT_THROW(apply_mask(p, tape.constant(Tensor({3}, 1.0))), DimensionError);
}

TEST(PointmapApply, Values) {
  Tape tape;
  const Tensor pts = Tensor::matrix({{1, 2, 3}, {-1, 0, 2}, {0.5, 0.5, -1}});
  auto p = tape.constant(pts);
  EXPECT_EQ(pointmap_apply(p, tape.constant(Tensor({3, 3}, 0.0))).value(), pts);
  Tensor neg = pts;
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
  EXPECT_EQ(pointmap_apply(p, tape.constant(neg)).value(), Tensor({3, 3}, 0.0));
  Tensor shift({3, 3}, 0.0);
  for (std::size_t r = 0; r < 3; ++r) shift.at(r, 0) = 1.0;
  const Tensor moved = pointmap_apply(p, tape.constant(shift)).value();
  auto dist = [](const Tensor& x, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) s += std::pow(x.at(a, c) - x.at(b, c), 2);
    return std::sqrt(s);
  };
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) EXPECT_NEAR(dist(moved, a, b), dist(pts, a, b), 1e-12);
  }
}

TEST(RandMask, Counts) {
  Rng rng(23);
  Tensor pts({200, 3}, 1.0);
  EXPECT_EQ(rand_mask(pts, 0.0, 0.0, rng), pts);
  EXPECT_EQ(rand_mask(pts, 100.0, 100.0, rng), Tensor({200, 3}, 0.0));
  const Tensor half = rand_mask(pts, 50.0, 50.0, rng);
  std::size_t zero_rows = 0;
  for (std::size_t r = 0; r < 200; ++r) zero_rows += half.at(r, 0) == 0.0;
  EXPECT_EQ(zero_rows, 100u);
  EXPECT_THROW(rand_mask(pts, 60.0, 10.0, rng), DomainError);
}

TEST(MaskHead, ZeroWeightHeadsEmitBiases) {
  Rng rng(24);
  MaskHeadParams head = init_mask_head(nn::WidthProfile::desk(), 16, Variant::kPointMask, rng);
  head.mu_head.weight = Tensor(head.mu_head.weight.shape(), 0.0);
  head.logvar_head.weight = Tensor(head.logvar_head.weight.shape(), 0.0);
  for (std::size_t i = 0; i < 16; ++i) head.mu_head.bias[i] = 0.1 * static_cast<double>(i);
  Tensor pts({16, 3});
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = uniform(rng, -1.0, 1.0);
  Tape tape;
  nn::Binder bind(tape, false);
  const std::vector<std::size_t> offsets{0, 16};
  Gaussian g = mask_head_forward(bind, head, tape.constant(pts), offsets, nn::Mode::kEval);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(g.mu.value()[i], head.mu_head.bias[i]);
    EXPECT_EQ(g.log_var.value()[i], kInitialLogVar);
  }
}

TEST(MaskHead, PermutationKeepsSlotOutputs) {
  Rng rng(25);
  MaskHeadParams head = init_mask_head(nn::WidthProfile::desk(), 12, Variant::kPointMap, rng);
  EXPECT_EQ(head.slots(), 36u);
  Tensor pts({12, 3});
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = uniform(rng, -1.0, 1.0);
  Tensor rev({12, 3});
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t c = 0; c < 3; ++c) rev.at(r, c) = pts.at(11 - r, c);
  }
  const std::vector<std::size_t> offsets{0, 12};
  auto run = [&](const Tensor& x) {
    Tape tape;
    nn::Binder bind(tape, false);
    Gaussian g = mask_head_forward(bind, head, tape.constant(x), offsets, nn::Mode::kEval);
    return std::pair{g.mu.value(), g.log_var.value()};
  };
  const auto a = run(pts);
  const auto b = run(rev);
  for (std::size_t i = 0; i < 36; ++i) {
    EXPECT_NEAR(a.first[i], b.first[i], 1e-12);
    EXPECT_NEAR(a.second[i], b.second[i], 1e-12);
  }
  EXPECT_EQ(run(pts).first, a.first);
}

TEST(MaskHead, PointCountMismatch) {
  Rng rng(26);
  MaskHeadParams head = init_mask_head(nn::WidthProfile::desk(), 8, Variant::kPointMask, rng);
  Tape tape;
  nn::Binder bind(tape, false);
  const std::vector<std::size_t> offsets{0, 9};
  EXPECT_THROW(mask_head_forward(bind, head, tape.constant(Tensor({9, 3}, 0.1)), offsets,
                                 nn::Mode::kEval),
               DimensionError);
}

TEST(Variants, NamesRoundTrip) {
  for (Variant v : {Variant::kPointMask, Variant::kPointMap, Variant::kRandMask, Variant::kBaseline}) {
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  }
  EXPECT_THROW(parse_variant("mystery"), Error);
  EXPECT_TRUE(has_mask_head(Variant::kPointMap));
  EXPECT_FALSE(has_mask_head(Variant::kRandMask));
}

TEST(Variants, BaselinePassesPointsThrough) {
  Tape tape;
  nn::Binder bind(tape, false);
  MaskConfig config;
  config.variant = Variant::kBaseline;
  const Tensor pts = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const std::vector<std::size_t> offsets{0, 2};
  MaskOutput out = apply_variant(bind, nullptr, config, tape.constant(pts), offsets,
                                 nn::Mode::kEval, VariantInputs{});
  EXPECT_EQ(out.masked_points.value(), pts);
}

}  // namespace
}  // namespace pointmask::mask
