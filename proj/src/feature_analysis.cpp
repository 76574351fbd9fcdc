// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/feature_analysis.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "vdit/error.hpp"
#include "vdit/log.hpp"

namespace vdit {

void RoiDecay::add(const std::vector<double>& cosines, const std::vector<bool>& present) {
  if (sum.size() < cosines.size()) {
    sum.resize(cosines.size(), 0.0);
    count.resize(cosines.size(), 0);
  }
  for (std::size_t i = 0; i < cosines.size(); ++i)
    if (present[i]) {
      sum[i] += cosines[i];
      ++count[i];
    }
}

std::vector<double> RoiDecay::mean() const {
  std::vector<double> m(sum.size(), 0.0);
  for (std::size_t i = 0; i < sum.size(); ++i) m[i] = count[i] ? sum[i] / count[i] : 0.0;
  return m;
}

std::vector<double> roi_similarity_decay(const torch::Tensor& features, const torch::Tensor& masks,
                                         std::vector<bool>* present) {
  VDIT_REQUIRE(features.dim() == 4 && masks.dim() == 3 && features.size(0) == masks.size(0),
               ErrorKind::ShapeMismatch, "roi", "expected features [T, C, h, w] and masks [T, H, W]");
  const auto T = features.size(0);
  VDIT_REQUIRE(T >= 2, ErrorKind::InvalidArgument, std::to_string(T), "need at least two frames");
  const auto h = features.size(2), w = features.size(3);
  VDIT_REQUIRE(masks.size(1) % h == 0 && masks.size(2) % w == 0, ErrorKind::ShapeMismatch, "roi",
               "mask size is not a multiple of the feature size");
  torch::NoGradGuard ng;
  auto f = features.to(torch::kFloat64);
  auto weight = torch::adaptive_avg_pool2d(masks.to(torch::kFloat64).unsqueeze(1), {h, w});  // [T,1,h,w]
  auto mass = weight.sum({1, 2, 3});
  auto roi = (f * weight).sum({2, 3}) / mass.clamp_min(1e-12).unsqueeze(1);  // [T, C]
  const auto ma = mass.accessor<double, 1>();

  std::vector<double> out(static_cast<std::size_t>(T - 1), 0.0);
  std::vector<bool> ok(out.size(), false);
  for (int64_t k = 1; k < T; ++k) {
    if (ma[0] <= 0 || ma[k] <= 0) {
      log::warn("roi decay: empty mask at frame ", ma[0] <= 0 ? 0 : k, ", offset ", k, " skipped");
      continue;
    }
    auto a = roi[0], b = roi[k];
    const double denom = (a.norm() * b.norm()).item<double>();
    out[static_cast<std::size_t>(k - 1)] = denom > 0 ? (a * b).sum().item<double>() / denom : 0.0;
    ok[static_cast<std::size_t>(k - 1)] = true;
  }
  if (present) *present = ok;
  return out;
}

KMeansResult kmeans_feature_map(const torch::Tensor& features, int k, std::uint64_t seed, int max_iter,
                                double tol) {
  VDIT_REQUIRE(features.dim() == 4, ErrorKind::ShapeMismatch, "features", "expected [T, C, h, w]");
  VDIT_REQUIRE(k >= 2, ErrorKind::InvalidArgument, std::to_string(k), "need K >= 2");
  const auto T = features.size(0), C = features.size(1), h = features.size(2), w = features.size(3);
  const int64_t n = T * h * w;
  VDIT_REQUIRE(n >= k, ErrorKind::InvalidArgument, std::to_string(n), "fewer feature vectors than clusters");

  auto pts_t = features.detach().to(torch::kFloat64).permute({0, 2, 3, 1}).reshape({n, C}).contiguous();
  const double* pts = pts_t.data_ptr<double>();
  auto dist2 = [&](const double* a, const double* b) {
    double s = 0;
    for (int64_t c = 0; c < C; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
  };

  std::mt19937_64 rng(seed);
  std::vector<double> centers(static_cast<std::size_t>(k * C));
  auto center = [&](int j) { return centers.data() + static_cast<std::ptrdiff_t>(j) * C; };
  // k-means++ seeding
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  int64_t first = std::uniform_int_distribution<int64_t>(0, n - 1)(rng);
  std::copy(pts + first * C, pts + (first + 1) * C, center(0));
  for (int j = 1; j < k; ++j) {
    double total = 0;
    for (int64_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(pts + i * C, center(j - 1)));
      total += d2[i];
    }
    int64_t pick = n - 1;
    if (total > 0) {
      double r = std::uniform_real_distribution<double>(0, total)(rng);
      for (int64_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<int64_t>(0, n - 1)(rng);
    }
    std::copy(pts + pick * C, pts + (pick + 1) * C, center(j));
  }

  KMeansResult res;
  std::vector<int64_t> label(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < max_iter; ++it) {
    double inertia = 0;
    for (int64_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = dist2(pts + i * C, center(j));
        if (d < best) {
          best = d;
          label[i] = j;
        }
      }
      inertia += best;
    }
    res.inertia.push_back(inertia);
    res.iterations = it + 1;
    const auto m = res.inertia.size();
    if (m >= 2) {
      const double prev = res.inertia[m - 2];
      if (prev <= 0 || (prev - inertia) / prev < tol) break;
    }
    // update; an empty cluster keeps its center
    std::vector<double> acc(centers.size(), 0.0);
    std::vector<int64_t> cnt(static_cast<std::size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      ++cnt[label[i]];
      for (int64_t c = 0; c < C; ++c) acc[label[i] * C + c] += pts[i * C + c];
    }
    for (int j = 0; j < k; ++j)
      if (cnt[j] > 0)
        for (int64_t c = 0; c < C; ++c) center(j)[c] = acc[j * C + c] / cnt[j];
  }
  res.labels = torch::from_blob(label.data(), {T, h, w}, torch::kInt64).clone();
  res.centers = torch::from_blob(centers.data(), {k, C}, torch::kFloat64).clone();
  return res;
}

std::vector<LightingPoint> lighting_robustness(const std::vector<RenderedSample>& samples,
                                               const std::vector<double>& levels, const IouFn& iou,
                                               std::uint64_t seed) {
  VDIT_REQUIRE(!samples.empty(), ErrorKind::InvalidArgument, "samples", "no clips to perturb");
  std::vector<LightingPoint> curve;
  for (double level : levels) {
    VDIT_REQUIRE(level >= 0 && level < 1, ErrorKind::InvalidArgument, std::to_string(level),
                 "level must lie in [0, 1)");
    double total = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto& sample = samples[s];
      std::mt19937_64 rng(seed * 1000003ULL + s);
      std::bernoulli_distribution coin(0.5);
      std::vector<int> idx;
      std::vector<double> factors;
      for (int t = 0; t < sample.frame_count(); ++t) {
        const bool pick = coin(rng);
        const bool brighter = coin(rng);
        if (pick && level > 0) {
          idx.push_back(t);
          factors.push_back(brighter ? 1 + level : 1 - level);
        }
      }
      total += iou(idx.empty() ? sample.frames : perturb_brightness(sample.frames, idx, factors), sample);
    }
    curve.push_back({level, total / static_cast<double>(samples.size())});
  }
  return curve;
}

}  // namespace vdit
