// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace vdit {

/// Owning binary mask, row-major, values in {0, 1}.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t operator()(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& operator()(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t area() const;
};

/// Mask IoU; two empty masks score 1.
double region_similarity(const Mask& pred, const Mask& gt);

/// Foreground pixels with a 4-neighbour that is background; pixels outside the
/// image count as background.
Mask boundary_map(const Mask& m);

/// Boundary tolerance in pixels: ceil(0.008 * image diagonal).
int boundary_radius(int height, int width);

struct BoundaryScore {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

/// Boundary F-measure; boundary pixels match when a boundary pixel of the
/// other mask lies within boundary_radius (Euclidean).
BoundaryScore boundary_score(const Mask& pred, const Mask& gt);
double contour_accuracy(const Mask& pred, const Mask& gt);

inline constexpr std::array<double, 10> kMapThresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                          0.75, 0.80, 0.85, 0.90, 0.95};

struct ScoredMask {
  double score = 0;
  Mask mask;
};

/// One annotated frame: a single ground-truth instance and any number of
/// scored candidate masks.
struct MapSample {
  Mask gt;
  std::vector<ScoredMask> predictions;
};

struct MapResult {
  std::array<double, 10> ap{};
  double map = 0;
  double overall_iou = 0;
  double mean_iou = 0;
};

/// All-point interpolated AP of score-ranked predictions, one-to-one matched
/// per sample at IoU >= tau.
double average_precision(std::span<const MapSample> samples, double tau);

/// mAP over kMapThresholds; Overall/Mean IoU use each sample's top-scored
/// prediction (ties: lowest index).
MapResult map_suite(std::span<const MapSample> samples);

/// mean_t |iou[t] - iou[t + k]| over one video.
double iou_diff(std::span<const double> per_frame_iou, int k);
/// Per-video iou_diff averaged over videos.
double iou_diff(const std::vector<std::vector<double>>& videos, int k);

/// count(iou > 0.9) / count(iou > 0.5); 0 when nothing exceeds 0.5.
double hq_ratio(std::span<const double> ious);

struct VideoScores {
  std::vector<double> iou;  // per valid frame
  std::vector<double> f;    // per valid frame
};

struct JfSummary {
  double j = 0;
  double f = 0;
  double jf = 0;
};

/// J and F are per-video frame means averaged over videos; jf = (j + f) / 2.
JfSummary summarize_jf(const std::vector<VideoScores>& videos);

}  // namespace vdit
