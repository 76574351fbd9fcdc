// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vdit/error.hpp"

namespace vdit {

std::size_t Mask::area() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](auto v) { return v != 0; }));
}

namespace {

void require_same_shape(const Mask& a, const Mask& b) {
  VDIT_REQUIRE(a.height == b.height && a.width == b.width, ErrorKind::ShapeMismatch,
               std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                   std::to_string(b.height) + "x" + std::to_string(b.width),
               "masks must have equal shape");
}

// Squared Euclidean distance transform of a 1-D sampled function
// (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const auto n = f.size();
  std::vector<std::size_t> v(n);
  std::vector<double> z(n + 1);
  auto intersect = [&](std::size_t q, std::size_t p) {
    const double qd = static_cast<double>(q);
    const double pd = static_cast<double>(p);
    return ((f[q] + qd * qd) - (f[p] + pd * pd)) / (2.0 * (qd - pd));
  };
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double dq = static_cast<double>(q) - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

// Squared distance from every pixel to the nearest set pixel of m.
std::vector<double> squared_distance_to(const Mask& m) {
  const double inf = 1e12;
  const int H = m.height;
  const int W = m.width;
  std::vector<double> grid(static_cast<std::size_t>(H) * W);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = m.data[i] ? 0.0 : inf;

  std::vector<double> f(static_cast<std::size_t>(std::max(H, W)));
  std::vector<double> d(f.size());
  for (int x = 0; x < W; ++x) {
    f.resize(static_cast<std::size_t>(H));
    d.resize(static_cast<std::size_t>(H));
    for (int y = 0; y < H; ++y) f[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * W + x];
    edt_1d(f, d);
    for (int y = 0; y < H; ++y) grid[static_cast<std::size_t>(y) * W + x] = d[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < H; ++y) {
    f.assign(grid.begin() + static_cast<std::ptrdiff_t>(y) * W,
             grid.begin() + static_cast<std::ptrdiff_t>(y + 1) * W);
    d.resize(static_cast<std::size_t>(W));
    edt_1d(f, d);
    std::copy(d.begin(), d.end(), grid.begin() + static_cast<std::ptrdiff_t>(y) * W);
  }
  return grid;
}

}  // namespace

double region_similarity(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const bool a = pred.data[i] != 0;
    const bool b = gt.data[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Mask boundary_map(const Mask& m) {
  Mask b(m.height, m.width);
  auto bg = [&](int y, int x) {
    return y < 0 || x < 0 || y >= m.height || x >= m.width || m(y, x) == 0;
  };
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m(y, x) && (bg(y - 1, x) || bg(y + 1, x) || bg(y, x - 1) || bg(y, x + 1))) b(y, x) = 1;
  return b;
}

int boundary_radius(int height, int width) {
  return static_cast<int>(std::ceil(0.008 * std::hypot(static_cast<double>(height), static_cast<double>(width))));
}

BoundaryScore boundary_score(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt);
  const Mask pb = boundary_map(pred);
  const Mask gb = boundary_map(gt);
  const std::size_t n_pred = pb.area();
  const std::size_t n_gt = gb.area();

  BoundaryScore s;
  if (n_pred == 0 && n_gt == 0) {
    s.precision = s.recall = s.f = 1.0;
    return s;
  }
  if (n_pred == 0 || n_gt == 0) {
    s.precision = n_pred == 0 ? 1.0 : 0.0;
    s.recall = n_gt == 0 ? 1.0 : 0.0;
    s.f = 0.0;
    return s;
  }

  const double r = boundary_radius(pred.height, pred.width);
  const double r2 = r * r;
  const auto dist_to_gt = squared_distance_to(gb);
  const auto dist_to_pred = squared_distance_to(pb);
  std::size_t pred_hit = 0, gt_hit = 0;
  for (std::size_t i = 0; i < pb.data.size(); ++i) {
    if (pb.data[i] && dist_to_gt[i] <= r2) ++pred_hit;
    if (gb.data[i] && dist_to_pred[i] <= r2) ++gt_hit;
  }
  s.precision = static_cast<double>(pred_hit) / static_cast<double>(n_pred);
  s.recall = static_cast<double>(gt_hit) / static_cast<double>(n_gt);
  s.f = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double contour_accuracy(const Mask& pred, const Mask& gt) { return boundary_score(pred, gt).f; }

double average_precision(std::span<const MapSample> samples, double tau) {
  VDIT_REQUIRE(!samples.empty(), ErrorKind::InvalidArgument, "samples", "empty dataset");
  struct Candidate {
    double score;
    std::size_t sample;
    std::size_t index;
    double iou;
  };
  std::vector<Candidate> cands;
  for (std::size_t s = 0; s < samples.size(); ++s)
    for (std::size_t p = 0; p < samples[s].predictions.size(); ++p)
      cands.push_back({samples[s].predictions[p].score, s, p,
                       region_similarity(samples[s].predictions[p].mask, samples[s].gt)});
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  const double num_gt = static_cast<double>(samples.size());
  std::vector<bool> matched(samples.size(), false);
  std::vector<double> precision, recall;
  double tp = 0, fp = 0;
  for (const auto& c : cands) {
    if (!matched[c.sample] && c.iou >= tau) {
      matched[c.sample] = true;
      tp += 1;
    } else {
      fp += 1;
    }
    precision.push_back(tp / (tp + fp));
    recall.push_back(tp / num_gt);
  }
  // precision envelope, then area under the step curve
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0, prev_recall = 0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

MapResult map_suite(std::span<const MapSample> samples) {
  VDIT_REQUIRE(!samples.empty(), ErrorKind::InvalidArgument, "samples", "empty dataset");
  MapResult r;
  for (std::size_t i = 0; i < kMapThresholds.size(); ++i)
    r.ap[i] = average_precision(samples, kMapThresholds[i]);
  r.map = std::accumulate(r.ap.begin(), r.ap.end(), 0.0) / static_cast<double>(r.ap.size());

  double inter_sum = 0, union_sum = 0, iou_sum = 0;
  for (const auto& s : samples) {
    const ScoredMask* top = nullptr;
    for (const auto& p : s.predictions)
      if (top == nullptr || p.score > top->score) top = &p;
    if (top != nullptr) require_same_shape(top->mask, s.gt);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < s.gt.data.size(); ++i) {
      const bool g = s.gt.data[i] != 0;
      const bool a = top != nullptr && top->mask.data[i] != 0;
      inter += a && g;
      uni += a || g;
    }
    inter_sum += static_cast<double>(inter);
    union_sum += static_cast<double>(uni);
    iou_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  r.overall_iou = union_sum == 0 ? 1.0 : inter_sum / union_sum;
  r.mean_iou = iou_sum / static_cast<double>(samples.size());
  return r;
}

double iou_diff(std::span<const double> per_frame_iou, int k) {
  VDIT_REQUIRE(k >= 1 && static_cast<int>(per_frame_iou.size()) > k, ErrorKind::InvalidArgument,
               "T=" + std::to_string(per_frame_iou.size()) + " k=" + std::to_string(k),
               "iou_diff requires T > k");
  double sum = 0;
  const std::size_t n = per_frame_iou.size() - static_cast<std::size_t>(k);
  for (std::size_t t = 0; t < n; ++t)
    sum += std::abs(per_frame_iou[t] - per_frame_iou[t + static_cast<std::size_t>(k)]);
  return sum / static_cast<double>(n);
}

double iou_diff(const std::vector<std::vector<double>>& videos, int k) {
  VDIT_REQUIRE(!videos.empty(), ErrorKind::InvalidArgument, "videos", "no videos");
  double sum = 0;
  for (const auto& v : videos) sum += iou_diff(std::span<const double>(v), k);
  return sum / static_cast<double>(videos.size());
}

double hq_ratio(std::span<const double> ious) {
  VDIT_REQUIRE(!ious.empty(), ErrorKind::InvalidArgument, "ious", "no samples");
  const auto high = std::count_if(ious.begin(), ious.end(), [](double v) { return v > 0.9; });
  const auto moderate = std::count_if(ious.begin(), ious.end(), [](double v) { return v > 0.5; });
  return moderate == 0 ? 0.0 : static_cast<double>(high) / static_cast<double>(moderate);
}

JfSummary summarize_jf(const std::vector<VideoScores>& videos) {
  VDIT_REQUIRE(!videos.empty(), ErrorKind::InvalidArgument, "videos", "no videos");
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  JfSummary s;
  for (const auto& v : videos) {
    s.j += mean(v.iou);
    s.f += mean(v.f);
  }
  s.j /= static_cast<double>(videos.size());
  s.f /= static_cast<double>(videos.size());
  s.jf = (s.j + s.f) / 2;
  return s;
}

}  // namespace vdit
