// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/eval_metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "vdit/error.hpp"

namespace vdit {
namespace {

Mask rect(int h, int w, int y0, int x0, int y1, int x1) {
  Mask m(h, w);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m(y, x) = 1;
  return m;
}

TEST(RegionSimilarity, HandCases) {
  const auto a = rect(8, 8, 0, 0, 4, 4);  // 16 px
  const auto b = rect(8, 8, 2, 2, 6, 6);  // overlap 4
  EXPECT_NEAR(region_similarity(a, b), 4.0 / 28.0, 1e-12);
  EXPECT_DOUBLE_EQ(region_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(region_similarity(Mask(8, 8), Mask(8, 8)), 1.0);
  EXPECT_DOUBLE_EQ(region_similarity(a, Mask(8, 8)), 0.0);
}

TEST(RegionSimilarity, RejectsShapeMismatch) {
  try {
    region_similarity(Mask(4, 4), Mask(4, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Boundary, MapOfFilledRectangle) {
  const auto b = boundary_map(rect(6, 6, 1, 1, 5, 5));
  EXPECT_EQ(b.area(), 12u);  // 4x4 square: ring of 12
  EXPECT_EQ(b(2, 2), 0);
  EXPECT_EQ(b(1, 1), 1);
  // touching the image border counts as boundary
  EXPECT_EQ(boundary_map(rect(3, 3, 0, 0, 3, 3)).area(), 8u);
}

TEST(Boundary, RadiusFromDiagonal) {
  EXPECT_EQ(boundary_radius(64, 64), 1);
  EXPECT_EQ(boundary_radius(480, 854), 8);
}

TEST(Boundary, HandCaseShiftedSquare) {
  // 64x64: radius 1. A one-pixel shift keeps every boundary pixel within reach.
  const auto a = rect(64, 64, 10, 10, 30, 30);
  const auto b = rect(64, 64, 10, 11, 30, 31);
  EXPECT_DOUBLE_EQ(contour_accuracy(a, b), 1.0);
  // three pixels apart: only the pixels of the top and bottom edges match
  const auto c = rect(64, 64, 10, 13, 30, 33);
  const auto s = boundary_score(a, c);
  EXPECT_NEAR(s.precision, s.recall, 1e-12);
  EXPECT_GT(s.f, 0.0);
  EXPECT_LT(s.f, 1.0);
}

TEST(Boundary, EmptyCases) {
  const auto a = rect(16, 16, 2, 2, 6, 6);
  EXPECT_DOUBLE_EQ(contour_accuracy(Mask(16, 16), Mask(16, 16)), 1.0);
  EXPECT_DOUBLE_EQ(contour_accuracy(a, Mask(16, 16)), 0.0);
  EXPECT_DOUBLE_EQ(contour_accuracy(Mask(16, 16), a), 0.0);
}

TEST(Boundary, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const int h = 20 + i % 7 * 8, w = 24 + i % 5 * 40;
    const auto p = oracle::random_blob_mask(rng, h, w);
    const auto g = oracle::random_blob_mask(rng, h, w);
    ASSERT_NEAR(contour_accuracy(p, g), oracle::boundary_f(p, g), 1e-9) << "case " << i;
  }
}

std::vector<MapSample> six_sample_case() {
  // Ranked by score: TP, FP, TP, TP, FP, TP against one gt per sample.
  const bool hit[6] = {true, false, true, true, false, true};
  std::vector<MapSample> s;
  for (int i = 0; i < 6; ++i) {
    MapSample m;
    m.gt = rect(8, 8, 0, 0, 4, 4);
    m.predictions.push_back({0.9 - 0.1 * i, hit[i] ? rect(8, 8, 0, 0, 4, 4) : rect(8, 8, 4, 4, 8, 8)});
    s.push_back(std::move(m));
  }
  return s;
}

TEST(AveragePrecision, SixSampleHandCase) {
  // P = 1, 1/2, 2/3, 3/4, 3/5, 4/6 at R = 1/6, 1/6, 2/6, 3/6, 3/6, 4/6.
  // Envelope: 1, 3/4, 3/4, 3/4, 2/3, 2/3 -> AP = 1/6 + 2 * (1/6)(3/4) + (1/6)(2/3) = 19/36.
  const auto s = six_sample_case();
  EXPECT_NEAR(average_precision(s, 0.5), 19.0 / 36.0, 1e-12);
  EXPECT_NEAR(oracle::average_precision(s, 0.5), 19.0 / 36.0, 1e-12);
}

TEST(AveragePrecision, ThresholdGridMatchesOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(0, 1);
  std::uniform_int_distribution<int> shift(0, 5), extra(0, 2);
  std::vector<MapSample> samples;
  for (int i = 0; i < 40; ++i) {
    MapSample m;
    m.gt = rect(20, 20, 4, 4, 14, 14);
    const int n = 1 + extra(rng);
    for (int k = 0; k < n; ++k) {
      const int d = shift(rng);
      m.predictions.push_back({score(rng), rect(20, 20, 4 + d, 4, 14 + d, 14)});
    }
    samples.push_back(std::move(m));
  }
  const auto r = map_suite(samples);
  double sum = 0;
  for (std::size_t i = 0; i < kMapThresholds.size(); ++i) {
    EXPECT_NEAR(r.ap[i], oracle::average_precision(samples, kMapThresholds[i]), 1e-12) << kMapThresholds[i];
    sum += r.ap[i];
  }
  EXPECT_NEAR(r.map, sum / 10.0, 1e-12);
  EXPECT_EQ(kMapThresholds.front(), 0.50);
  EXPECT_EQ(kMapThresholds.back(), 0.95);
}

TEST(AveragePrecision, PerfectPredictionsScoreOne) {
  std::vector<MapSample> s(3);
  for (auto& m : s) {
    m.gt = rect(8, 8, 1, 1, 5, 5);
    m.predictions.push_back({0.5, m.gt});
  }
  const auto r = map_suite(s);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_DOUBLE_EQ(r.overall_iou, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_iou, 1.0);
}

TEST(AveragePrecision, DuplicateHitIsFalsePositive) {
  MapSample m;
  m.gt = rect(8, 8, 0, 0, 4, 4);
  m.predictions = {{0.9, m.gt}, {0.8, m.gt}};
  const std::vector<MapSample> s{m};
  EXPECT_NEAR(average_precision(s, 0.5), 1.0, 1e-12);  // recall reaches 1 at precision 1
  const auto r = map_suite(s);
  EXPECT_DOUBLE_EQ(r.mean_iou, 1.0);
}

TEST(OverallIou, UsesTopScoredPrediction) {
  MapSample a;
  a.gt = rect(4, 4, 0, 0, 2, 2);                                     // 4 px
  a.predictions = {{0.2, a.gt}, {0.7, rect(4, 4, 0, 0, 2, 4)}};      // top: 8 px, inter 4
  MapSample b;
  b.gt = rect(4, 4, 0, 0, 4, 4);                                     // 16 px
  b.predictions = {{0.5, rect(4, 4, 0, 0, 4, 2)}};                   // 8 px
  const std::vector<MapSample> s{a, b};
  const auto r = map_suite(s);
  EXPECT_NEAR(r.overall_iou, (4.0 + 8.0) / (8.0 + 16.0), 1e-12);
  EXPECT_NEAR(r.mean_iou, (0.5 + 0.5) / 2, 1e-12);
}

TEST(IouDiff, HandCase) {
  const std::vector<double> v{0.9, 0.7, 0.8, 0.8, 0.2, 0.6, 0.6};
  EXPECT_NEAR(iou_diff(std::span<const double>(v), 1), (0.2 + 0.1 + 0 + 0.6 + 0.4 + 0) / 6, 1e-12);
  EXPECT_NEAR(iou_diff(std::span<const double>(v), 5), (0.3 + 0.1) / 2, 1e-12);
  const std::vector<std::vector<double>> videos{{1.0, 0.0}, {0.5, 0.5}};
  EXPECT_NEAR(iou_diff(videos, 1), 0.5, 1e-12);
}

TEST(IouDiff, RequiresMoreFramesThanOffset) {
  const std::vector<double> v{0.1, 0.2, 0.3, 0.4, 0.5};
  EXPECT_THROW(iou_diff(std::span<const double>(v), 5), Error);
}

TEST(HqRatio, CountsAboveThresholds) {
  const std::vector<double> v{0.95, 0.91, 0.9, 0.6, 0.4, 0.51};
  EXPECT_NEAR(hq_ratio(v), 2.0 / 5.0, 1e-12);
  const std::vector<double> low{0.1, 0.5};
  EXPECT_DOUBLE_EQ(hq_ratio(low), 0.0);
}

TEST(JandF, MeanOfBoth) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VideoScores> v(5);
    for (auto& s : v)
      for (int t = 0; t < 1 + trial % 7; ++t) {
        s.iou.push_back(u(rng));
        s.f.push_back(u(rng));
      }
    const auto r = summarize_jf(v);
    ASSERT_NEAR(r.jf, (r.j + r.f) / 2, 1e-12);
  }
  const std::vector<VideoScores> one{{{0.2, 0.4}, {1.0, 0.0}}, {{0.9}, {0.3}}};
  const auto r = summarize_jf(one);
  EXPECT_NEAR(r.j, (0.3 + 0.9) / 2, 1e-12);
  EXPECT_NEAR(r.f, (0.5 + 0.3) / 2, 1e-12);
}

}  // namespace
}  // namespace vdit
