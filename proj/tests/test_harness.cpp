// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vdit/error.hpp"
#include "vdit/report.hpp"

namespace vdit {
namespace {

namespace fs = std::filesystem;

ExperimentConfig micro() {
  auto c = preset_config("quick");
  c.data.train_videos = 3;
  c.data.eval_videos = 3;
  c.data.frame_count = 3;
  c.pretrain.codec.steps = 3;
  c.pretrain.t2v.steps = 3;
  c.pretrain.t2v.val_videos = 2;
  c.optim.steps = 3;
  c.analysis.kmeans_videos = 1;
  c.analysis.lighting_videos = 2;
  c.analysis.lighting_levels = {0.0, 0.5};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class HarnessTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / "vdit_harness_test";
    fs::remove_all(root);
  }
  static void TearDownTestSuite() { fs::remove_all(root); }
  static fs::path root;
};
fs::path HarnessTest::root;

TEST_F(HarnessTest, PaperScalePresetIsRefused) {
  EXPECT_THROW(pretrain(preset_config("paper-scale"), root), Error);
}

TEST_F(HarnessTest, EvaluateWithoutModelReportsMissingFile) {
  try {
    evaluate_run(micro(), root / "empty");
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFile);
  }
}

TEST_F(HarnessTest, EndToEndOutputsAndReproducibility) {
  const auto cfg = micro();
  const auto hash = config_hash(cfg);
  const auto a = train_and_evaluate(cfg, root / "a");
  EXPECT_EQ(a.dir, root / "a" / run_id(cfg));
  for (const auto* stem : {"config_", "train_", "summary_"}) EXPECT_TRUE(fs::exists(a.dir / (stem + hash + ".json")));
  for (const auto* stem : {"loss_", "per_frame_", "per_video_", "map_", "metrics_", "roi_decay_"})
    EXPECT_TRUE(fs::exists(a.dir / (stem + hash + ".csv"))) << stem;
  EXPECT_TRUE(fs::exists(a.dir / ("loss_" + hash + ".png")));
  EXPECT_TRUE(fs::exists(a.dir / ("model_" + hash + ".pt")));

  const auto metrics = read_csv(a.dir / ("metrics_" + hash + ".csv"));
  EXPECT_EQ(metrics.header, (std::vector<std::string>{"metric", "value"}));
  std::vector<std::string> names;
  for (const auto& r : metrics.rows) names.push_back(r[0]);
  EXPECT_EQ(names, (std::vector<std::string>{"j", "f", "jf", "map", "overall_iou", "mean_iou", "iou_diff_k1",
                                             "iou_diff_k5", "hq_ratio"}));
  const auto per_video = read_csv(a.dir / ("per_video_" + hash + ".csv"));
  EXPECT_EQ(per_video.rows.size(), 3u);
  EXPECT_EQ(read_csv(a.dir / ("map_" + hash + ".csv")).rows.size(), 10u);

  // a second output tree with the same config and seed gives identical CSVs
  const auto b = train_and_evaluate(cfg, root / "b");
  for (const auto* stem : {"loss_", "per_frame_", "per_video_", "metrics_"})
    EXPECT_EQ(slurp(a.dir / (stem + hash + ".csv")), slurp(b.dir / (stem + hash + ".csv"))) << stem;

  // a different seed changes the run directory and the trained model
  auto other = cfg;
  other.seed = 1;
  EXPECT_NE(run_dir(other, root / "a"), a.dir);
}

TEST_F(HarnessTest, AnalyzeWritesItsTables) {
  const auto cfg = micro();
  train(cfg, root / "analyze");
  const auto o = analyze(cfg, root / "analyze");
  const auto hash = config_hash(cfg);
  for (const auto* stem : {"kmeans_", "lighting_", "temporal_", "roi_decay_"})
    EXPECT_TRUE(fs::exists(o.dir / (stem + hash + ".csv"))) << stem;
  EXPECT_EQ(read_csv(o.dir / ("lighting_" + hash + ".csv")).rows.size(), 2u);
}

TEST(AblationPlan, RowsAndReferenceColumns) {
  const auto rows = ablation_plan(preset_config("quick"));
  int conditioning = 0, fusion = 0, timestep = 0;
  for (const auto& r : rows) {
    conditioning += r.table == "conditioning";
    fusion += r.table == "fusion";
    timestep += r.table == "timestep";
  }
  EXPECT_EQ(conditioning, 4);
  EXPECT_EQ(fusion, 4);
  EXPECT_EQ(timestep, 5);
  const auto cfg = preset_config("quick");
  EXPECT_EQ(fusion_parameter_count(cfg, Fusion::Attention), fusion_parameter_count(cfg, Fusion::Concat));
}

}  // namespace
}  // namespace vdit
