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
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "data/shapes.hpp"
#include "diffcore/ops.hpp"
#include "evalreport/evalreport.hpp"
#include "mask/mask.hpp"
#include "train/train.hpp"

namespace pointmask::eval {
namespace {

using ad::Tensor;
using train::ModelParams;
using train::TrainConfig;

data::Dataset balanced(std::size_t classes, std::size_t per_class) {
  data::SyntheticSpec spec;
  spec.num_classes = classes;
  spec.per_class = per_class;
  spec.num_points = 32;
  spec.seed = 1;
  return data::generate_synthetic(spec);
}

ModelParams constant_model(std::size_t classes) {
  Rng rng(2);
  TrainConfig c = TrainConfig::desk();
  c.mask.variant = mask::Variant::kBaseline;
  ModelParams m = train::init_model(c, classes, 32, rng);
  auto& last = m.classifier.head.back();
  last.weight.fill(0.0);
  last.bias.fill(0.0);
  return m;
}

// Class 0 clouds sit at x = -1, class 1 clouds at x = +1; a one-feature
// network separates them exactly.
ModelParams sign_model() {
  ModelParams m;
  m.mask.variant = mask::Variant::kBaseline;
  m.profile = "sign";
  nn::SharedMlpLayer l;
  l.dense.weight = Tensor({3, 2}, 0.0);
  l.dense.weight.at(0, 0) = 1.0;
  l.dense.weight.at(0, 1) = -1.0;
  l.dense.bias = Tensor({2}, 0.0);
  l.norm.scale = Tensor({2}, 1.0);
  l.norm.shift = Tensor({2}, 0.0);
  l.norm.running_mean = Tensor({2}, 0.0);
  l.norm.running_var = Tensor({2}, 1.0 - 1e-5);
  m.classifier.trunk = {l};
  nn::DenseLayerParams out{Tensor::matrix({{0, 1}, {1, 0}}), Tensor({2}, 0.0)};
  m.classifier.head = {out};
  m.classifier.dropout_rate = 0.0;
  return m;
}

data::Dataset sign_dataset(std::size_t per_class) {
  data::Dataset d;
  d.class_names = {"left", "right"};
  for (std::uint32_t label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const double x = label == 0 ? -1.0 : 1.0;
      d.samples.push_back({data::PointCloud{{{x, 0.1 * i, 0}, {x, 0, 0.2}}}, label});
    }
  }
  return d;
}

TEST(Evaluate, ConstantLogitsPredictClassZero) {
  const Metrics m = evaluate(constant_model(4), balanced(4, 5));
  EXPECT_EQ(m.num_samples, 20u);
  EXPECT_DOUBLE_EQ(m.overall_accuracy, 0.25);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(m.confusion[t][0], 5u);
  }
  EXPECT_DOUBLE_EQ(m.per_class_accuracy[0], 1.0);
  EXPECT_DOUBLE_EQ(m.per_class_accuracy[3], 0.0);
}

TEST(Evaluate, TopCIsOne) {
  const std::vector<std::size_t> ns{1, 2, 3};
  const Metrics m = evaluate(constant_model(3), balanced(3, 4), ns);
  EXPECT_DOUBLE_EQ(m.top_n.at(3), 1.0);
  EXPECT_LE(m.top_n.at(1), m.top_n.at(2));
  EXPECT_LE(m.top_n.at(2), m.top_n.at(3));
  EXPECT_DOUBLE_EQ(m.top_n.at(1), m.overall_accuracy);
}

TEST(Evaluate, PerfectModelDiagonalConfusion) {
  const Metrics m = evaluate(sign_model(), sign_dataset(3));
  EXPECT_DOUBLE_EQ(m.overall_accuracy, 1.0);
  EXPECT_EQ(m.confusion, (std::vector<std::vector<std::size_t>>{{3, 0}, {0, 3}}));
}

TEST(Evaluate, ClassCountMismatch) {
  EXPECT_THROW(evaluate(constant_model(3), balanced(4, 2)), ContractError);
}

TEST(LabelRank, TiesFavorLowerIndex) {
  const std::vector<double> logits{0.5, 2.0, 2.0, -1.0};
  EXPECT_EQ(label_rank(logits, 1), 0u);
  EXPECT_EQ(label_rank(logits, 2), 1u);
  EXPECT_EQ(label_rank(logits, 0), 2u);
  EXPECT_EQ(label_rank(logits, 3), 3u);
}

class Attribution : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(3);
    TrainConfig c = TrainConfig::desk();
    model_ = train::init_model(c, 3, 16, rng);
    for (int i = 0; i < 16; ++i) {
      cloud_.points.push_back({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)});
    }
    // Spread the mask over the whole sigmoid range.
    for (std::size_t i = 0; i < 16; ++i) model_.head->mu_head.bias[i] = -4.0 + 0.5 * i;
  }

  std::vector<double> sigmoid_mu() const {
    ad::Tape tape;
    nn::Binder bind(tape, false);
    const std::vector<std::size_t> offsets{0, 16};
    auto g = mask::mask_head_forward(bind, *model_.head,
                                     tape.constant(data::to_tensor(cloud_)), offsets,
                                     nn::Mode::kEval);
    std::vector<double> out;
    for (std::size_t i = 0; i < 16; ++i) out.push_back(ad::stable_sigmoid(g.mu.value()[i]));
    return out;
  }

  ModelParams model_;
  data::PointCloud cloud_;
};

TEST_F(Attribution, ZeroThresholdIsSigmoid) {
  const std::vector<double> t{0.0};
  const auto records = attribute(model_, cloud_, t);
  ASSERT_EQ(records.size(), 1u);
  const std::vector<double> expected = sigmoid_mu();
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(records[0].mask[i], expected[i], 1e-15);
  EXPECT_EQ(records[0].survivors(), 16u);
}

TEST_F(Attribution, SurvivorsFallWithThreshold) {
  const std::vector<double> t{0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999999};
  const auto records = attribute(model_, cloud_, t);
  ASSERT_EQ(records.size(), t.size());
  for (std::size_t k = 1; k < records.size(); ++k) {
    EXPECT_LE(records[k].survivors(), records[k - 1].survivors());
  }
  for (double v : records.back().mask) EXPECT_LT(v, 1e-5);
  EXPECT_EQ(records.back().points, cloud_);
}

TEST_F(Attribution, RejectsVariantsWithoutMask) {
  const std::vector<double> t{0.5};
  EXPECT_THROW(attribute(constant_model(3), cloud_, t), VariantError);
}

TEST(Ply, HeaderAndRoundTrip) {
  AttributionRecord r;
  r.points = data::PointCloud{{{0.1, 0.2, 0.3}, {-1.0, 0.5, 2.0}, {0.0, 0.0, 0.0}}};
  r.mask = {0.75, 0.0, 0.123456789};
  const std::string text = attribution_ply(r);
  EXPECT_NE(text.find("element vertex 3\n"), std::string::npos);
  EXPECT_NE(text.find("property float mask"), std::string::npos);
  const AttributionRecord back = parse_attribution_ply(text);
  ASSERT_EQ(back.points.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.mask[i], r.mask[i], 1e-6);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(back.points.points[i][c], r.points.points[i][c], 1e-6);
  }
  // The masked-out point is still in the file.
  EXPECT_EQ(back.mask[1], 0.0);
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  Table t;
  t.header = {"a", "b"};
  EXPECT_EQ(to_csv(t), "a,b\n");
}

TEST(Csv, ConfusionShape) {
  Metrics m;
  m.confusion = {{3, 1, 0}, {0, 4, 0}, {2, 0, 2}};
  const std::vector<std::string> names{"x", "y", "z"};
  const Table t = confusion_table(m, names);
  EXPECT_EQ(t.header.size(), 4u);
  ASSERT_EQ(t.rows.size(), 3u);
  for (const auto& row : t.rows) EXPECT_EQ(row.size(), 4u);
  EXPECT_EQ(t.rows[2][0], "z");
  EXPECT_EQ(t.rows[2][1], "2");
}

TEST(Csv, ReparseIsExact) {
  Table t;
  t.header = {"name", "value"};
  t.rows = {{"a", format_double(0.1)}, {"b,c", format_double(1.0 / 3.0)}, {"q\"d", "-2"}};
  const Table back = parse_csv(to_csv(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(std::stod(back.rows[1][1]), 1.0 / 3.0);
}

TEST(FormatDouble, ShortestAndLocaleFree) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Tables, TopNAndLog) {
  Metrics m;
  m.top_n = {{1, 0.5}, {3, 0.9}};
  const Table t = top_n_table(m);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "3");
  std::vector<train::EpochRecord> log(2);
  log[1].epoch = 2;
  EXPECT_EQ(training_log_table(log).rows.size(), 2u);
}

TEST(MetricsJson, Fields) {
  const Metrics m = evaluate(sign_model(), sign_dataset(2));
  const std::string j = metrics_json(m);
  EXPECT_NE(j.find("\"overall_accuracy\""), std::string::npos) << j;
  EXPECT_NE(j.find("\"confusion\""), std::string::npos) << j;
}

}  // namespace
}  // namespace pointmask::eval
