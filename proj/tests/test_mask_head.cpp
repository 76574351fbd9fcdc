// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/mask_head.hpp"

#include <gtest/gtest.h>

#include "vdit/error.hpp"

namespace vdit {
namespace {

TEST(DynamicConv, ParameterCount) {
  EXPECT_EQ(dynamic_param_count(8, 8), 153);   // 2 * (64 + 8) + 8 + 1
  EXPECT_EQ(dynamic_param_count(10, 8), 169);  // 80 + 8 + 64 + 8 + 8 + 1
  EXPECT_EQ(dynamic_param_count(1, 1), 6);
}

TEST(DynamicConv, HandCaseOneChannel) {
  // c = 1: y = w3 * relu(w2 * relu(w1 x + b1) + b2) + b3
  auto f = torch::tensor({-1.0, 0.5, 2.0, 3.0}, torch::kFloat64).view({1, 1, 2, 2});
  auto p = torch::tensor({2.0, -0.5, 1.5, 0.25, -2.0, 0.75, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0}, torch::kFloat64)
               .view({1, 2, 6});
  auto y = dynamic_mask_conv(f, p, 1);
  ASSERT_EQ(y.sizes(), (std::vector<int64_t>{1, 2, 2, 2}));
  auto ref = [](double x, const double* w) {
    const double a = std::max(0.0, w[0] * x + w[1]);
    const double b = std::max(0.0, w[2] * a + w[3]);
    return w[4] * b + w[5];
  };
  const double q0[6] = {2.0, -0.5, 1.5, 0.25, -2.0, 0.75}, q1[6] = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  const double xs[4] = {-1.0, 0.5, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(y[0][0][i / 2][i % 2].item<double>(), ref(xs[i], q0), 1e-12);
    EXPECT_NEAR(y[0][1][i / 2][i % 2].item<double>(), ref(xs[i], q1), 1e-12);
  }
}

TEST(DynamicConv, MatchesPerQueryConv2d) {
  torch::manual_seed(0);
  const int in = 4, c = 3;
  auto f = torch::randn({2, in, 5, 4}, torch::kFloat64);
  auto p = torch::randn({2, 3, dynamic_param_count(in, c)}, torch::kFloat64);
  auto y = dynamic_mask_conv(f, p, c);
  for (int t = 0; t < 2; ++t)
    for (int q = 0; q < 3; ++q) {
      auto v = p[t][q];
      int off = 0;
      auto take = [&](int n) {
        auto s = v.narrow(0, off, n);
        off += n;
        return s;
      };
      auto w1 = take(c * in).view({c, in, 1, 1}), b1 = take(c), w2 = take(c * c).view({c, c, 1, 1}), b2 = take(c);
      auto w3 = take(c).view({1, c, 1, 1}), b3 = take(1);
      auto x = torch::relu(torch::conv2d(f[t].unsqueeze(0), w1, b1));
      x = torch::relu(torch::conv2d(x, w2, b2));
      x = torch::conv2d(x, w3, b3);
      ASSERT_TRUE(torch::allclose(y[t][q], x[0][0], 1e-10, 1e-12));
    }
  // per-query features give the same result as the shared map
  auto per_query = f.unsqueeze(1).expand({2, 3, in, 5, 4});
  EXPECT_TRUE(torch::allclose(dynamic_mask_conv(per_query, p, c), y));
  EXPECT_THROW(dynamic_mask_conv(f, p.narrow(2, 0, 10), c), Error);
}

TEST(DynamicConv, RelativeCoordinates) {
  auto centers = torch::tensor({0.5, 0.25}, torch::kFloat64).view({1, 1, 2});
  auto r = relative_coordinates(centers, 2, 4);
  ASSERT_EQ(r.sizes(), (std::vector<int64_t>{1, 1, 2, 2, 4}));
  // pixel centers x = 0.125, 0.375, 0.625, 0.875 and y = 0.25, 0.75
  EXPECT_DOUBLE_EQ(r[0][0][0][1][0].item<double>(), -0.375);
  EXPECT_DOUBLE_EQ(r[0][0][0][0][3].item<double>(), 0.375);
  EXPECT_DOUBLE_EQ(r[0][0][1][0][2].item<double>(), 0.0);
  EXPECT_DOUBLE_EQ(r[0][0][1][1][0].item<double>(), 0.5);
}

TEST(SelectInstance, MeanSigmoidArgmaxWithLowestIndexTies) {
  // q1 has the largest single score, q2 the largest mean
  auto s = torch::tensor({0.0f, 5.0f, 2.0f, 0.0f, -5.0f, 2.0f}).view({2, 3});
  EXPECT_EQ(select_instance(s), 2);
  EXPECT_EQ(select_instance(torch::zeros({4, 3})), 0);
  auto tie = torch::tensor({1.0f, 3.0f, 3.0f}).view({1, 3});
  EXPECT_EQ(select_instance(tie), 1);
}

MaskHeadConfig small_config() {
  MaskHeadConfig cfg;
  cfg.queries = 3;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.ffn_dim = 32;
  cfg.text_dim = 12;
  cfg.level_channels = {5, 6, 7, 8};
  cfg.max_text_tokens = 6;
  return cfg;
}

FeaturePyramid pyramid(int T, int H) {
  const int c[4] = {5, 6, 7, 8};
  FeaturePyramid p;
  for (int l = 0; l < 4; ++l) p.levels[l] = torch::randn({T, c[l], H >> (l + 2), H >> (l + 2)});
  return p;
}

TEST(MaskHead, OutputShapesAndRanges) {
  torch::manual_seed(1);
  MaskHead head(small_config());
  auto p = head->forward(pyramid(3, 64), torch::randn({4, 12}));
  EXPECT_EQ(p.boxes.sizes(), (std::vector<int64_t>{3, 3, 4}));
  EXPECT_EQ(p.scores.sizes(), (std::vector<int64_t>{3, 3}));
  EXPECT_EQ(p.masks_lowres.sizes(), (std::vector<int64_t>{3, 3, 8, 8}));
  EXPECT_EQ(p.masks.sizes(), (std::vector<int64_t>{3, 3, 64, 64}));
  EXPECT_GE(p.boxes.min().item<float>(), 0.f);
  EXPECT_LE(p.boxes.max().item<float>(), 1.f);
}

TEST(MaskHead, TextMatchingWeightsAreDistributions) {
  torch::manual_seed(2);
  MaskHead head(small_config());
  auto m = head->text_instance_matching(torch::randn({5, 12}));
  EXPECT_EQ(m.queries.sizes(), (std::vector<int64_t>{3, 16}));
  EXPECT_EQ(m.weights.sizes(), (std::vector<int64_t>{3, 5}));
  EXPECT_LE((m.weights.sum(-1) - 1).abs().max().item<double>(), 1e-5);
}

TEST(MaskHead, QueriesDependOnTheExpression) {
  torch::manual_seed(3);
  MaskHead head(small_config());
  auto a = head->text_instance_matching(torch::randn({3, 12})).queries;
  auto b = head->text_instance_matching(torch::randn({3, 12})).queries;
  EXPECT_FALSE(torch::allclose(a, b));
}

TEST(MaskHead, RejectsBadInputs) {
  MaskHead head(small_config());
  EXPECT_THROW(head->text_instance_matching(torch::randn({3, 10})), Error);   // width
  EXPECT_THROW(head->text_instance_matching(torch::randn({7, 12})), Error);   // too many tokens
  EXPECT_THROW(head->text_instance_matching(torch::randn({0, 12})), Error);   // empty
  auto p = pyramid(2, 64);
  p.levels[0] = torch::randn({2, 5, 8, 8});  // 4x level does not align
  EXPECT_THROW(head->forward(p, torch::randn({3, 12})), Error);
}

TEST(MaskHead, FramesAreIndependentWithoutTemporalMixing) {
  // Each frame is decoded from its own features: changing frame 1 leaves frame 0 unchanged.
  torch::manual_seed(4);
  MaskHead head(small_config());
  head->eval();
  auto p = pyramid(2, 32);
  auto words = torch::randn({3, 12});
  auto a = head->forward(p, words);
  for (auto& l : p.levels) l[1].normal_();
  auto b = head->forward(p, words);
  EXPECT_TRUE(torch::allclose(a.masks[0], b.masks[0], 1e-5, 1e-5));
  EXPECT_FALSE(torch::allclose(a.masks[1], b.masks[1], 1e-5, 1e-5));
}

}  // namespace
}  // namespace vdit
