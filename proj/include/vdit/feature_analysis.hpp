// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <vector>

#include "vdit/synth_data.hpp"

namespace vdit {

/// Cosine similarity between the RoI vector of frame 0 and of frame k, for
/// k = 1 .. T-1. The RoI vector is the mean feature weighted by the area
/// fraction of the mask inside each feature cell. Offsets whose frame (or
/// frame 0) has an empty mask are skipped and stay unset.
struct RoiDecay {
  std::vector<double> sum;   // per offset k-1
  std::vector<int> count;
  void add(const std::vector<double>& cosines, const std::vector<bool>& present);
  std::vector<double> mean() const;
};

/// features [T, C, h, w], masks [T, H, W] (H, W multiples of h, w).
/// Returns one value per offset; `present` marks offsets that were computed.
std::vector<double> roi_similarity_decay(const torch::Tensor& features, const torch::Tensor& masks,
                                         std::vector<bool>* present = nullptr);

struct KMeansResult {
  torch::Tensor labels;          // [T, h, w] int64
  torch::Tensor centers;         // [K, C] float64
  std::vector<double> inertia;   // after each assignment step
  int iterations = 0;
};

/// Lloyd's algorithm on per-pixel vectors pooled across frames, k-means++
/// seeding, at most max_iter iterations or until the relative inertia change
/// drops below tol. features [T, C, h, w].
KMeansResult kmeans_feature_map(const torch::Tensor& features, int k, std::uint64_t seed, int max_iter = 100,
                                double tol = 1e-4);

/// Mean IoU of a model on a set of clips; the callback maps (frames, sample)
/// to that sample's mean IoU.
using IouFn = std::function<double(const torch::Tensor& frames, const RenderedSample& sample)>;

struct LightingPoint {
  double level = 0;
  double mean_iou = 0;
};

/// For every level, each frame of each clip is rescaled with probability 1/2
/// by 1 + level or 1 - level (random sign), then scored. Level 0 leaves the
/// clips untouched. Randomness derives from (seed, sample index).
std::vector<LightingPoint> lighting_robustness(const std::vector<RenderedSample>& samples,
                                               const std::vector<double>& levels, const IouFn& iou,
                                               std::uint64_t seed);

}  // namespace vdit
