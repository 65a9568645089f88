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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pointmask/pointmask.h"

namespace {

namespace fs = std::filesystem;

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("pm_capi_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const char* name) const { return (dir_ / name).string(); }

  static std::string bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static pm_train_config* config(const char* variant, const char* epochs) {
    pm_train_config* c = nullptr;
    EXPECT_EQ(pm_train_config_create("desk", &c), PM_OK);
    EXPECT_EQ(pm_train_config_set(c, "variant", variant), PM_OK);
    EXPECT_EQ(pm_train_config_set(c, "epochs", epochs), PM_OK);
    EXPECT_EQ(pm_train_config_set(c, "learning_rate", "1e-3"), PM_OK);
    EXPECT_EQ(pm_train_config_set(c, "seed", "5"), PM_OK);
    return c;
  }

  fs::path dir_;
};

TEST_F(CApi, VersionAndStatusNames) {
  EXPECT_NE(std::string(pm_version()), "");
  EXPECT_STREQ(pm_status_name(PM_OK), "ok");
  EXPECT_NE(std::string(pm_status_name(PM_ERR_FORMAT)), "");
}

TEST_F(CApi, DatasetRoundTrip) {
  pm_dataset* ds = nullptr;
  ASSERT_EQ(pm_dataset_generate(3, 4, 32, 7, &ds), PM_OK);
  EXPECT_EQ(pm_dataset_size(ds), 12u);
  EXPECT_EQ(pm_dataset_num_classes(ds), 3u);
  EXPECT_EQ(pm_dataset_num_points(ds), 32u);
  ASSERT_EQ(pm_dataset_save(ds, file("a.pmds").c_str()), PM_OK);

  pm_dataset* back = nullptr;
  ASSERT_EQ(pm_dataset_load(file("a.pmds").c_str(), &back), PM_OK);
  ASSERT_EQ(pm_dataset_save(back, file("b.pmds").c_str()), PM_OK);
  EXPECT_EQ(bytes(file("a.pmds")), bytes(file("b.pmds")));

  uint32_t label = 99;
  size_t n = 0;
  ASSERT_EQ(pm_dataset_sample_info(back, 5, &label, &n), PM_OK);
  EXPECT_EQ(label, 1u);
  EXPECT_EQ(n, 32u);
  std::vector<double> pts(n * 3);
  EXPECT_EQ(pm_dataset_sample_points(back, 5, pts.data(), pts.size()), PM_OK);
  EXPECT_EQ(pm_dataset_sample_points(back, 5, pts.data(), 3), PM_ERR_DIMENSION);
  EXPECT_EQ(pm_dataset_sample_info(back, 12, &label, &n), PM_ERR_INDEX);

  pm_dataset* biased = nullptr;
  ASSERT_EQ(pm_dataset_inject_bias(ds, 8, 1, "append", &biased), PM_OK);
  EXPECT_EQ(pm_dataset_num_points(biased), 40u);
  EXPECT_EQ(pm_dataset_inject_bias(ds, 8, 1, "sideways", &biased), PM_ERR_CONFIG);

  pm_dataset_free(biased);
  pm_dataset_free(back);
  pm_dataset_free(ds);
}

TEST_F(CApi, ErrorsCarryMessages) {
  pm_dataset* ds = nullptr;
  EXPECT_EQ(pm_dataset_load(file("missing.pmds").c_str(), &ds), PM_ERR_IO);
  EXPECT_EQ(ds, nullptr);
  EXPECT_NE(std::string(pm_last_error()), "");
  {
    std::ofstream out(file("junk.pmds"), std::ios::binary);
    out << "JUNKJUNKJUNK";
  }
  EXPECT_EQ(pm_dataset_load(file("junk.pmds").c_str(), &ds), PM_ERR_FORMAT);
  EXPECT_NE(std::string(pm_last_error()).find("magic"), std::string::npos);
  EXPECT_EQ(pm_dataset_generate(3, 4, 32, 7, nullptr), PM_ERR_INVALID_ARGUMENT);

  pm_train_config* c = nullptr;
  ASSERT_EQ(pm_train_config_create("desk", &c), PM_OK);
  EXPECT_EQ(pm_train_config_set(c, "no_such_key", "1"), PM_ERR_CONFIG);
  EXPECT_EQ(pm_train_config_set(c, "epochs", "many"), PM_ERR_CONFIG);
  EXPECT_EQ(pm_train_config_set(c, "epochs", "0"), PM_OK);
  EXPECT_EQ(pm_train_config_validate(c), PM_ERR_CONFIG);
  pm_train_config_free(c);
  EXPECT_EQ(pm_train_config_create("galactic", &c), PM_ERR_CONFIG);

  {
    std::ofstream out(file("bad.xyz"));
    out << "1 2 3\n4 5\n";
  }
  double* pts = nullptr;
  size_t n = 0;
  EXPECT_EQ(pm_xyz_load(file("bad.xyz").c_str(), &pts, &n), PM_ERR_PARSE);
  EXPECT_NE(std::string(pm_last_error()).find("2"), std::string::npos);
}

TEST_F(CApi, ConfigJson) {
  pm_train_config* c = config("pointmap", "3");
  char* json = nullptr;
  ASSERT_EQ(pm_train_config_to_json(c, &json), PM_OK);
  const std::string text = json;
  pm_string_free(json);
  EXPECT_NE(text.find("pointmap"), std::string::npos) << text;
  pm_train_config_free(c);
}

struct EpochLog {
  std::vector<pm_epoch_info> infos;
  std::vector<uint32_t> state_epochs;
};

void on_epoch(const pm_epoch_info* info, const pm_model* state, void* user) {
  auto* log = static_cast<EpochLog*>(user);
  log->infos.push_back(*info);
  log->state_epochs.push_back(pm_model_epoch(state));
}

void on_log(const char* line, void* user) {
  static_cast<std::vector<std::string>*>(user)->push_back(line);
}

TEST_F(CApi, TrainEvaluatePredictAttribute) {
  pm_dataset* ds = nullptr;
  ASSERT_EQ(pm_dataset_generate(2, 10, 32, 3, &ds), PM_OK);
  pm_train_config* c = config("pointmask", "2");

  std::vector<std::string> lines;
  pm_set_log_callback(on_log, &lines);
  EpochLog log;
  pm_model* best = nullptr;
  pm_model* last = nullptr;
  ASSERT_EQ(pm_train(ds, c, nullptr, on_epoch, &log, &best, &last), PM_OK) << pm_last_error();
  pm_set_log_callback(nullptr, nullptr);
  ASSERT_EQ(log.infos.size(), 2u);
  EXPECT_EQ(log.state_epochs, (std::vector<uint32_t>{1, 2}));
  EXPECT_EQ(lines.size(), 2u);
  ASSERT_NE(best, nullptr);
  EXPECT_EQ(pm_model_epoch(last), 2u);
  EXPECT_STREQ(pm_model_variant(last), "pointmask");
  EXPECT_EQ(pm_model_num_points(last), 32u);
  EXPECT_EQ(pm_model_num_classes(last), 2u);

  ASSERT_EQ(pm_model_save(last, file("m.pmck").c_str()), PM_OK);
  pm_model* loaded = nullptr;
  ASSERT_EQ(pm_model_load(file("m.pmck").c_str(), &loaded), PM_OK);
  ASSERT_EQ(pm_model_save(loaded, file("m2.pmck").c_str()), PM_OK);
  EXPECT_EQ(bytes(file("m.pmck")), bytes(file("m2.pmck")));

  char* csv = nullptr;
  ASSERT_EQ(pm_model_log_csv(loaded, &csv), PM_OK);
  EXPECT_EQ(std::string(csv).substr(0, 5), "epoch");
  pm_string_free(csv);

  const size_t top_n[] = {1, 2};
  pm_metrics* m = nullptr;
  ASSERT_EQ(pm_evaluate(loaded, ds, top_n, 2, &m), PM_OK);
  EXPECT_EQ(pm_metrics_num_classes(m), 2u);
  EXPECT_DOUBLE_EQ(pm_metrics_top_n(m, 2), 1.0);
  EXPECT_TRUE(std::isnan(pm_metrics_top_n(m, 5)));
  size_t diag = pm_metrics_confusion(m, 0, 0) + pm_metrics_confusion(m, 1, 1);
  EXPECT_DOUBLE_EQ(pm_metrics_accuracy(m), static_cast<double>(diag) / 20.0);
  ASSERT_EQ(pm_metrics_export_csv(m, "confusion", file("conf.csv").c_str()), PM_OK);
  EXPECT_TRUE(fs::exists(file("conf.csv")));
  EXPECT_EQ(pm_metrics_export_csv(m, "bogus", file("x.csv").c_str()), PM_ERR_INVALID_ARGUMENT);
  pm_metrics_free(m);

  std::vector<double> pts(32 * 3);
  ASSERT_EQ(pm_dataset_sample_points(ds, 0, pts.data(), pts.size()), PM_OK);
  double logits[2];
  ASSERT_EQ(pm_predict(loaded, pts.data(), 32, logits, 2), PM_OK);
  EXPECT_TRUE(std::isfinite(logits[0]) && std::isfinite(logits[1]));

  const double thresholds[] = {0.0, 0.5, 0.9};
  pm_attribution* a = nullptr;
  ASSERT_EQ(pm_attribute(loaded, pts.data(), 32, thresholds, 3, &a), PM_OK);
  ASSERT_EQ(pm_attribution_count(a), 3u);
  EXPECT_EQ(pm_attribution_num_points(a), 32u);
  EXPECT_EQ(pm_attribution_survivors(a, 0), 32u);
  EXPECT_LE(pm_attribution_survivors(a, 2), pm_attribution_survivors(a, 1));
  EXPECT_DOUBLE_EQ(pm_attribution_threshold(a, 1), 0.5);
  std::vector<double> mask(32);
  ASSERT_EQ(pm_attribution_mask(a, 1, mask.data(), mask.size()), PM_OK);
  for (double v : mask) EXPECT_LE(v, 0.5);
  ASSERT_EQ(pm_attribution_export_ply(a, 1, file("a.ply").c_str()), PM_OK);
  EXPECT_NE(bytes(file("a.ply")).find("element vertex 32"), std::string::npos);
  pm_attribution_free(a);

  pm_model_free(loaded);
  pm_model_free(best);
  pm_model_free(last);
  pm_train_config_free(c);
  pm_dataset_free(ds);
}

TEST_F(CApi, AttributeRejectsBaseline) {
  pm_dataset* ds = nullptr;
  ASSERT_EQ(pm_dataset_generate(2, 2, 16, 3, &ds), PM_OK);
  pm_train_config* c = config("baseline", "1");
  pm_model* last = nullptr;
  ASSERT_EQ(pm_train(ds, c, nullptr, nullptr, nullptr, nullptr, &last), PM_OK);
  std::vector<double> pts(16 * 3, 0.1);
  const double t = 0.5;
  pm_attribution* a = nullptr;
  EXPECT_EQ(pm_attribute(last, pts.data(), 16, &t, 1, &a), PM_ERR_VARIANT);
  pm_model_free(last);
  pm_train_config_free(c);
  pm_dataset_free(ds);
}

TEST_F(CApi, ResumeThroughHandles) {
  pm_dataset* ds = nullptr;
  ASSERT_EQ(pm_dataset_generate(2, 6, 16, 4, &ds), PM_OK);
  pm_train_config* c2 = config("randmask", "2");
  pm_model* full = nullptr;
  ASSERT_EQ(pm_train(ds, c2, nullptr, nullptr, nullptr, nullptr, &full), PM_OK);
  pm_train_config* c1 = config("randmask", "1");
  pm_model* half = nullptr;
  ASSERT_EQ(pm_train(ds, c1, nullptr, nullptr, nullptr, nullptr, &half), PM_OK);
  pm_model* resumed = nullptr;
  ASSERT_EQ(pm_train(ds, c2, half, nullptr, nullptr, nullptr, &resumed), PM_OK);
  ASSERT_EQ(pm_model_save(full, file("full.pmck").c_str()), PM_OK);
  ASSERT_EQ(pm_model_save(resumed, file("resumed.pmck").c_str()), PM_OK);
  EXPECT_EQ(bytes(file("full.pmck")), bytes(file("resumed.pmck")));
  for (pm_model* m : {full, half, resumed}) pm_model_free(m);
  pm_train_config_free(c1);
  pm_train_config_free(c2);
  pm_dataset_free(ds);
}

TEST_F(CApi, OffIngest) {
  const char* cube =
      "OFF\n8 6 0\n-1 -1 -1\n1 -1 -1\n1 1 -1\n-1 1 -1\n-1 -1 1\n1 -1 1\n1 1 1\n-1 1 1\n"
      "4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 1 2 6 5\n4 0 4 7 3\n";
  const char* tet = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
  { std::ofstream(file("cube.off")) << cube; }
  { std::ofstream(file("tet.off")) << tet; }
  { std::ofstream(file("broken.off")) << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"; }
  const std::string p0 = file("cube.off"), p1 = file("tet.off"), p2 = file("broken.off");
  const char* paths[] = {p0.c_str(), p1.c_str()};
  const uint32_t labels[] = {0, 1};
  const char* names[] = {"cube", "tet"};
  pm_dataset* ds = nullptr;
  ASSERT_EQ(pm_dataset_from_off(paths, labels, 2, names, 2, 64, 1, &ds), PM_OK) << pm_last_error();
  EXPECT_EQ(pm_dataset_num_points(ds), 64u);
  std::vector<double> pts(64 * 3);
  ASSERT_EQ(pm_dataset_sample_points(ds, 1, pts.data(), pts.size()), PM_OK);
  double max_norm = 0.0;
  for (size_t i = 0; i < 64; ++i) {
    max_norm = std::max(max_norm, std::sqrt(pts[3 * i] * pts[3 * i] + pts[3 * i + 1] * pts[3 * i + 1] +
                                            pts[3 * i + 2] * pts[3 * i + 2]));
  }
  EXPECT_NEAR(max_norm, 1.0, 1e-6);
  pm_dataset_free(ds);

  const char* bad[] = {p2.c_str()};
  EXPECT_EQ(pm_dataset_from_off(bad, labels, 1, names, 2, 64, 1, &ds), PM_ERR_PARSE);
  EXPECT_NE(std::string(pm_last_error()).find("6"), std::string::npos) << pm_last_error();
}

}  // namespace
