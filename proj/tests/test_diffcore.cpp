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
#include <numeric>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "diffcore/gradcheck.hpp"
#include "diffcore/ops.hpp"

namespace pointmask::ad {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double gap = 0.0) {
  Tensor t({r, c});
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = standard_normal(rng);
    if (gap > 0.0 && std::abs(v) < gap) v += v < 0.0 ? -gap : gap;
    t[i] = v;
  }
  return t;
}

TEST(Tensor, ShapeAndValues) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.at(1, 2), 1.5);
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5, 0.0)), DimensionError);
  EXPECT_THROW(t.reshaped({4}), DimensionError);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  EXPECT_EQ(Tensor::scalar(3.0).item(), 3.0);
}

TEST(Matmul, Identity) {
  Tape tape;
  auto i2 = tape.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  auto a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  EXPECT_EQ(matmul(i2, a).value(), a.value());
}

TEST(Matmul, HandProduct) {
  Tape tape;
  auto a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  auto b = tape.constant(Tensor::matrix({{5, 6}, {7, 8}}));
  EXPECT_EQ(matmul(a, b).value(), Tensor::matrix({{19, 22}, {43, 50}}));
}

TEST(Matmul, ZeroMatrix) {
  Tape tape;
  auto a = tape.constant(Tensor::matrix({{1, -2, 3}, {4, 5, -6}}));
  auto z = tape.constant(Tensor({3, 2}, 0.0));
  EXPECT_EQ(matmul(a, z).value(), Tensor({2, 2}, 0.0));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  Tape tape;
  auto a = tape.constant(Tensor({2, 3}));
  auto b = tape.constant(Tensor({2, 3}));
  try {
    matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
  }
}

TEST(ReduceMax, Values) {
  Tape tape;
  EXPECT_EQ(reduce_max(tape.constant(Tensor::matrix({{1, 5}, {3, 2}}))).value(),
            Tensor::vector({3, 5}));
  EXPECT_EQ(reduce_max(tape.constant(Tensor::matrix({{7, -1}}))).value(),
            Tensor::vector({7, -1}));
}

TEST(ReduceMax, TieRoutesGradientToFirstRow) {
  Tape tape;
  auto x = tape.variable(Tensor::matrix({{2, 0}, {2, 0}}));
  auto y = reduce_max(x);
  EXPECT_EQ(y.value(), Tensor::vector({2, 0}));
  tape.backward(sum(y));
  EXPECT_EQ(x.grad(), Tensor::matrix({{1, 1}, {0, 0}}));
}

TEST(ReduceMax, EmptySegmentIsDomainError) {
  Tape tape;
  auto x = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  const std::vector<std::size_t> offsets{0, 0, 2};
  EXPECT_THROW(segment_max(x, offsets), DomainError);
}

TEST(ReduceMax, PermutationInvariantWithPermutedGradient) {
  Rng rng(5);
  const Tensor a = random_matrix(6, 4, rng);
  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  Tensor b({6, 4});
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t c = 0; c < 4; ++c) b.at(i, c) = a.at(perm[i], c);
  }
  Tape tape;
  auto xa = tape.variable(a);
  auto xb = tape.variable(b);
  auto ya = reduce_max(xa);
  auto yb = reduce_max(xb);
  EXPECT_EQ(ya.value(), yb.value());
  tape.backward(add(sum(ya), sum(yb)));
  const Tensor ga = xa.grad();
  const Tensor gb = xb.grad();
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(gb.at(i, c), ga.at(perm[i], c));
  }
}

TEST(Sigmoid, Values) {
  Tape tape;
  auto y = sigmoid(tape.constant(Tensor::vector({0.0, std::log(9.0), 1e3, -1e3})));
  EXPECT_EQ(y.value()[0], 0.5);
  EXPECT_NEAR(y.value()[1], 0.9, 1e-15);
  EXPECT_EQ(y.value()[2], 1.0);
  EXPECT_GE(y.value()[3], 0.0);
  EXPECT_TRUE(y.value().all_finite());
}

TEST(Sigmoid, Symmetry) {
  for (double x : {0.1, 1.0, 3.7, 25.0, 400.0}) {
    EXPECT_NEAR(stable_sigmoid(x) + stable_sigmoid(-x), 1.0, 1e-15);
  }
}

TEST(SoftmaxCrossEntropy, UniformLogits) {
  Tape tape;
  auto l = softmax_cross_entropy(tape.constant(Tensor({10}, 0.25)), std::size_t{3});
  EXPECT_NEAR(l.value().item(), std::log(10.0), 1e-12);
}

TEST(SoftmaxCrossEntropy, Saturation) {
  Tape tape;
  auto l = softmax_cross_entropy(tape.constant(Tensor::vector({100, 0, 0})), std::size_t{0});
  EXPECT_NEAR(l.value().item(), 0.0, 1e-40);
  EXPECT_GE(l.value().item(), 0.0);
}

TEST(SoftmaxCrossEntropy, LogSumExpOracle) {
  // log(e + e^2 + e^3) - 3, evaluated at high precision.
  Tape tape;
  auto l = softmax_cross_entropy(tape.constant(Tensor::vector({1, 2, 3})), std::size_t{2});
  EXPECT_NEAR(l.value().item(), 0.40760596444438013, 1e-12);
}

TEST(SoftmaxCrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Tape tape;
  auto x = tape.variable(Tensor::vector({1, 2, 3}));
  tape.backward(softmax_cross_entropy(x, std::size_t{2}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  const Tensor g = x.grad();
  EXPECT_NEAR(g[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(g[1], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(g[2], std::exp(3.0) / z - 1.0, 1e-15);
}

TEST(SoftmaxCrossEntropy, LabelOutOfRange) {
  Tape tape;
  EXPECT_THROW(softmax_cross_entropy(tape.constant(Tensor::vector({1, 2})), std::size_t{2}),
               IndexError);
}

TEST(Backward, Identity) {
  Tape tape;
  auto x = tape.variable(Tensor::scalar(4.0));
  tape.backward(x);
  EXPECT_EQ(x.grad().item(), 1.0);
}

TEST(Backward, ProductRule) {
  Tape tape;
  auto x = tape.variable(Tensor::scalar(2.0));
  auto y = tape.variable(Tensor::scalar(3.0));
  tape.backward(mul(x, y));
  EXPECT_EQ(x.grad().item(), 3.0);
  EXPECT_EQ(y.grad().item(), 2.0);
}

TEST(Backward, FanOutAccumulates) {
  // loss = sum(x * x) + sum(3 x): gradient 2x + 3 collects both paths.
  Tape tape;
  auto x = tape.variable(Tensor::vector({1.0, -2.0, 0.5}));
  tape.backward(add(sum(mul(x, x)), sum(mul_scalar(x, 3.0))));
  EXPECT_EQ(x.grad(), Tensor::vector({5.0, -1.0, 4.0}));
}

TEST(Backward, NonScalarLossIsContractError) {
  Tape tape;
  auto x = tape.variable(Tensor::vector({1.0, 2.0}));
  EXPECT_THROW(tape.backward(x), ContractError);
}

TEST(Backward, ConstantsReceiveNoGradient) {
  Tape tape;
  auto c = tape.constant(Tensor::scalar(2.0));
  auto x = tape.variable(Tensor::scalar(5.0));
  tape.backward(mul(c, x));
  EXPECT_FALSE(c.requires_grad());
  EXPECT_EQ(c.grad().item(), 0.0);
}

TEST(GradCheck, LinearFunctionIsExact) {
  Rng rng(1);
  const Tensor x = random_matrix(4, 3, rng);
  EXPECT_LT(grad_check([](Tape&, Var v) { return sum(v); }, x), 1e-10);
}

TEST(GradCheck, ReduceMaxAwayFromTies) {
  Rng rng(2);
  const Tensor x = random_matrix(7, 5, rng);
  const Tensor w = random_matrix(1, 5, rng).reshaped({5});
  auto f = [&](Tape& t, Var v) { return sum(mul(reduce_max(v), t.constant(w))); };
  EXPECT_LT(grad_check(f, x), 1e-6);
}

TEST(GradCheck, RandomThreeLayerNet) {
  Rng rng(3);
  const Tensor x = random_matrix(5, 3, rng);
  const Tensor w1 = random_matrix(3, 6, rng), w2 = random_matrix(6, 4, rng),
               w3 = random_matrix(4, 2, rng);
  const Tensor b1({6}, 0.1), b2({4}, -0.2), b3({2}, 0.0);
  const std::vector<std::size_t> labels{0, 1, 1, 0, 1};
  auto net = [&](Tape& t, Var w) {
    Var h = sigmoid(linear(t.constant(x), w, t.constant(b1)));
    h = sigmoid(linear(h, t.constant(w2), t.constant(b2)));
    return softmax_cross_entropy(linear(h, t.constant(w3), t.constant(b3)), labels);
  };
  EXPECT_LT(grad_check(net, w1), 1e-6);
}

TEST(GradCheck, NonFiniteFunctionIsDomainError) {
  const Tensor x = Tensor::vector({-1.0, 2.0});
  EXPECT_THROW(grad_check([](Tape&, Var v) { return sum(log(v)); }, x), DomainError);
}

// Every elementwise and structural op at 100 random points away from kinks.
class OpGradients : public ::testing::TestWithParam<int> {};

TEST_P(OpGradients, CentralDifferencesAgree) {
  Rng rng(static_cast<std::uint64_t>(100 + GetParam()));
  const Tensor a = random_matrix(4, 3, rng, 0.05);
  const Tensor b = random_matrix(4, 3, rng);
  Tensor pos = a;
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = std::abs(pos[i]) + 0.5;
  const Tensor w = random_matrix(4, 3, rng);
  const Tensor wt = random_matrix(3, 4, rng);
  const Tensor row = random_matrix(1, 3, rng).reshaped({3});
  const Tensor s = random_matrix(1, 4, rng).reshaped({4});
  auto ws = [&](Var y) { return sum(mul(y, y.tape().constant(w))); };
  const double tol = 1e-5;
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(add(x, t.constant(b))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(sub(x, t.constant(b))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(mul(x, t.constant(b))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(add_scalar(x, 2.0)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(mul_scalar(x, -0.7)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(exp(x)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(log(x)); }, pos), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(relu(x)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(clamp(x, -0.5, 0.5)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(sigmoid(x)); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return mean(x); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return sum(mul(transpose(x), x.tape().constant(wt))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape&, Var x) { return ws(reshape(reshape(x, {12}), {4, 3})); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(add_row(x, t.constant(row))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(scale_rows(x, t.constant(s))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return sum(mul(row_sum(x), t.constant(s))); }, a), tol);
  EXPECT_LT(grad_check([&](Tape& t, Var x) { return ws(matmul(x, t.constant(Tensor::matrix({{1, 2, 0}, {0, -1, 3}, {2, 0, 1}})))); }, a), tol);
}

INSTANTIATE_TEST_SUITE_P(RandomPoints, OpGradients, ::testing::Range(0, 100));

TEST(BatchNorm, TrainNormalizesColumns) {
  Rng rng(9);
  const Tensor x = random_matrix(50, 3, rng);
  Tape tape;
  Tensor mean, var;
  auto y = batch_norm_train(tape.constant(x), tape.constant(Tensor({3}, 1.0)),
                            tape.constant(Tensor({3}, 0.0)), 1e-5, &mean, &var);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < 50; ++r) m += y.value().at(r, c);
    m /= 50.0;
    for (std::size_t r = 0; r < 50; ++r) v += std::pow(y.value().at(r, c) - m, 2);
    v /= 50.0;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, var[c] / (var[c] + 1e-5), 1e-12);
  }
}

TEST(BatchNorm, EvalUsesFixedStatistics) {
  Tape tape;
  auto y = batch_norm_eval(tape.constant(Tensor::matrix({{3.0, -1.0}})),
                           tape.constant(Tensor::vector({2.0, 1.0})),
                           tape.constant(Tensor::vector({0.5, 0.0})), Tensor::vector({1.0, 0.0}),
                           Tensor::vector({4.0, 1.0}), 0.0 + 1e-12);
  EXPECT_NEAR(y.value().at(0, 0), 2.0 * (3.0 - 1.0) / 2.0 + 0.5, 1e-9);
  EXPECT_NEAR(y.value().at(0, 1), -1.0, 1e-9);
}

TEST(BatchNorm, GradientsMatchFiniteDifferences) {
  Rng rng(10);
  const Tensor x = random_matrix(9, 4, rng);
  const Tensor w = random_matrix(9, 4, rng);
  const Tensor g = Tensor::vector({1.2, -0.4, 0.8, 2.0});
  const Tensor b = Tensor::vector({0.1, 0.0, -0.3, 0.5});
  auto f = [&](Tape& t, Var v) {
    return sum(mul(batch_norm_train(v, t.constant(g), t.constant(b), 1e-5), t.constant(w)));
  };
  EXPECT_LT(grad_check(f, x), 1e-6);
  auto fg = [&](Tape& t, Var v) {
    return sum(mul(batch_norm_train(t.constant(x), v, t.constant(b), 1e-5), t.constant(w)));
  };
  EXPECT_LT(grad_check(fg, g), 1e-6);
}

}  // namespace
}  // namespace pointmask::ad
