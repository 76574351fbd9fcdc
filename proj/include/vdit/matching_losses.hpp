// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <array>
#include <string>
#include <vector>

#include "vdit/hungarian.hpp"
#include "vdit/mask_head.hpp"

namespace vdit {

/// 1 - (2 sum(p g) + s) / (sum(p) + sum(g) + s), p = sigmoid(logits), over
/// all elements.
torch::Tensor dice_loss(const torch::Tensor& logits, const torch::Tensor& target, double smooth = 1.0);

/// Dice per leading index: logits/target [N, ...] -> [N].
torch::Tensor dice_loss_batched(const torch::Tensor& logits, const torch::Tensor& target, double smooth = 1.0);

/// Binary focal loss, mean over elements.
torch::Tensor focal_loss(const torch::Tensor& logits, const torch::Tensor& target, double alpha = 0.25,
                         double gamma = 2.0);
/// Same, without the reduction.
torch::Tensor focal_loss_elementwise(const torch::Tensor& logits, const torch::Tensor& target,
                                     double alpha = 0.25, double gamma = 2.0);

torch::Tensor cxcywh_to_xyxy(const torch::Tensor& boxes);
torch::Tensor xyxy_to_cxcywh(const torch::Tensor& boxes);

/// Generalized IoU of paired xyxy boxes [..., 4] -> [...]. A pair with zero
/// union has IoU 0; a zero-area enclosure adds no penalty.
torch::Tensor generalized_iou(const torch::Tensor& a, const torch::Tensor& b);
double giou(const std::array<double, 4>& a, const std::array<double, 4>& b);

/// Ground truth for one referred instance across a clip.
struct VideoTarget {
  torch::Tensor masks;  // [T, H, W] float in {0, 1}
  torch::Tensor boxes;  // [T, 4] normalized (cx, cy, w, h)
  torch::Tensor valid;  // [T] bool

  /// From pixel masks and exclusive (x1, y1, x2, y2) boxes.
  static VideoTarget from_pixels(const torch::Tensor& masks_u8, const torch::Tensor& boxes_xyxy,
                                 const std::vector<bool>& valid);
};

struct LossWeights {
  double mask_lowres = 1.0;  // lambda_Mo
  double mask = 1.0;         // lambda_M
  double box = 1.0;          // lambda_B
  double score = 1.0;        // lambda_S
  double dice = 5.0;
  double mask_focal = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
  double score_focal = 2.0;
};

/// Q x G matching cost from final masks, boxes and scores, averaged over
/// the frames where the target is valid.
CostMatrix matching_cost(const Predictions& pred, const std::vector<VideoTarget>& targets,
                         const LossWeights& w);

/// Nearest-neighbour 1/8 downsampling of [T, H, W] masks, sampling each
/// 8x8 block at offset (4, 4).
torch::Tensor downsample_mask(const torch::Tensor& masks, int factor = 8);

struct LossBreakdown {
  torch::Tensor total;
  // Unweighted terms.
  torch::Tensor lowres_dice, lowres_focal, mask_dice, mask_focal, box_l1, box_giou, score_focal;

  static std::vector<std::string> column_names();
  /// total first, then the terms in declaration order.
  std::vector<double> values() const;
};

/// Training loss for a matched prediction. Mask and box terms use valid
/// frames of each matched pair; the score term covers every (frame, query),
/// with target valid[t] for matched queries and 0 otherwise.
LossBreakdown total_loss(const Predictions& pred, const std::vector<VideoTarget>& targets,
                         const Assignment& assignment, const LossWeights& w);

}  // namespace vdit
