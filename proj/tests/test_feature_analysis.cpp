// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/feature_analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "vdit/error.hpp"
#include "vdit/synth_data.hpp"

namespace vdit {
namespace {

TEST(RoiDecay, HandCase) {
  // 2 x 2 feature cells over a 4 x 4 mask, C = 2
  auto f = torch::zeros({3, 2, 2, 2}, torch::kFloat64);
  f[0][0].fill_(1.0);                 // frame 0: (1, 0) everywhere
  f[1][0][0][0] = 1.0;                // frame 1: (1, 0) top-left, (0, 1) elsewhere
  f[1][1].fill_(1.0);
  f[1][1][0][0] = 0.0;
  f[2][1].fill_(1.0);                 // frame 2: (0, 1) everywhere
  auto m = torch::zeros({3, 4, 4}, torch::kUInt8);
  m[0].fill_(1);
  // frame 1: all of the top-left cell and half of the top-right cell
  m[1].narrow(0, 0, 2).narrow(1, 0, 2).fill_(1);
  m[1].narrow(0, 0, 1).narrow(1, 2, 2).fill_(1);
  m[2].fill_(1);
  std::vector<bool> present;
  const auto d = roi_similarity_decay(f, m, &present);
  ASSERT_EQ(d.size(), 2u);
  // frame 1 RoI: weights 1 and 0.5 -> (1, 0.5) / 1.5, cosine with (1, 0) = 1 / sqrt(1.25)
  EXPECT_NEAR(d[0], 1 / std::sqrt(1.25), 1e-12);
  EXPECT_NEAR(d[1], 0.0, 1e-12);
  EXPECT_EQ(present, (std::vector<bool>{true, true}));
}

TEST(RoiDecay, EmptyMaskSkipsOffset) {
  auto f = torch::rand({3, 2, 2, 2}, torch::kFloat64);
  auto m = torch::ones({3, 4, 4}, torch::kUInt8);
  m[2].zero_();
  std::vector<bool> present;
  roi_similarity_decay(f, m, &present);
  EXPECT_EQ(present, (std::vector<bool>{true, false}));
  RoiDecay acc;
  acc.add({0.5, 0.0}, {true, false});
  acc.add({0.7, 0.2}, {true, true});
  EXPECT_EQ(acc.mean(), (std::vector<double>{0.6, 0.2}));
  EXPECT_THROW(roi_similarity_decay(f, torch::ones({3, 5, 4}, torch::kUInt8)), Error);
}

TEST(KMeans, SeparatesObviousClustersAndInertiaNeverRises) {
  torch::manual_seed(0);
  auto f = torch::randn({2, 3, 6, 6}, torch::kFloat64) * 0.05;
  f.narrow(3, 0, 3).narrow(1, 0, 1) += 5.0;  // left half far away in channel 0
  auto r = kmeans_feature_map(f, 2, 1);
  ASSERT_EQ(r.labels.sizes(), (std::vector<int64_t>{2, 6, 6}));
  const auto left = r.labels[0][0][0].item<int64_t>();
  EXPECT_TRUE(torch::all(r.labels.narrow(2, 0, 3) == left).item<bool>());
  EXPECT_TRUE(torch::all(r.labels.narrow(2, 3, 3) != left).item<bool>());
  for (std::size_t i = 1; i < r.inertia.size(); ++i) EXPECT_LE(r.inertia[i], r.inertia[i - 1] + 1e-9);
  auto random = kmeans_feature_map(torch::randn({3, 4, 8, 8}, torch::kFloat64), 5, 2);
  for (std::size_t i = 1; i < random.inertia.size(); ++i) EXPECT_LE(random.inertia[i], random.inertia[i - 1] + 1e-9);
  EXPECT_THROW(kmeans_feature_map(f, 1, 0), Error);
}

TEST(KMeans, DeterministicPerSeed) {
  auto f = torch::randn({2, 4, 5, 5}, torch::kFloat64);
  auto a = kmeans_feature_map(f, 3, 9), b = kmeans_feature_map(f, 3, 9);
  EXPECT_TRUE(torch::equal(a.labels, b.labels));
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(Lighting, LevelZeroIsUntouchedAndPerturbationsAreSeeded) {
  DataConfig cfg;
  cfg.train_videos = 3;
  cfg.frame_count = 4;
  const auto clips = make_dataset(cfg, Split::Train);
  // score = mean brightness ratio against the clean clip
  IouFn score = [](const torch::Tensor& frames, const RenderedSample& s) {
    return (frames.sum() / s.frames.sum()).item<double>();
  };
  auto a = lighting_robustness(clips, {0.0, 0.4}, score, 3);
  auto b = lighting_robustness(clips, {0.0, 0.4}, score, 3);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_DOUBLE_EQ(a[0].mean_iou, 1.0);
  EXPECT_NE(a[1].mean_iou, 1.0);
  EXPECT_EQ(a[1].mean_iou, b[1].mean_iou);
  EXPECT_THROW(lighting_robustness(clips, {1.0}, score, 3), Error);
}

}  // namespace
}  // namespace vdit
