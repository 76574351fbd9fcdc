// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/matching_losses.hpp"

#include <algorithm>
#include <string>

#include "vdit/error.hpp"

namespace vdit {

torch::Tensor dice_loss(const torch::Tensor& logits, const torch::Tensor& target, double smooth) {
  VDIT_REQUIRE(logits.sizes() == target.sizes(), ErrorKind::ShapeMismatch, "dice", "logits and target differ");
  auto p = torch::sigmoid(logits).flatten();
  auto g = target.to(p.dtype()).flatten();
  return 1 - (2 * (p * g).sum() + smooth) / (p.sum() + g.sum() + smooth);
}

torch::Tensor dice_loss_batched(const torch::Tensor& logits, const torch::Tensor& target, double smooth) {
  VDIT_REQUIRE(logits.sizes() == target.sizes() && logits.dim() >= 1, ErrorKind::ShapeMismatch, "dice",
               "logits and target differ");
  auto p = torch::sigmoid(logits).flatten(1);
  auto g = target.to(p.dtype()).flatten(1);
  return 1 - (2 * (p * g).sum(1) + smooth) / (p.sum(1) + g.sum(1) + smooth);
}

torch::Tensor focal_loss_elementwise(const torch::Tensor& logits, const torch::Tensor& target, double alpha,
                                     double gamma) {
  VDIT_REQUIRE(logits.sizes() == target.sizes(), ErrorKind::ShapeMismatch, "focal", "logits and target differ");
  auto t = target.to(logits.dtype());
  auto p = torch::sigmoid(logits);
  auto ce = torch::binary_cross_entropy_with_logits(logits, t, {}, {}, at::Reduction::None);
  auto p_t = p * t + (1 - p) * (1 - t);
  auto loss = ce * torch::pow(1 - p_t, gamma);
  if (alpha >= 0) loss = (alpha * t + (1 - alpha) * (1 - t)) * loss;
  return loss;
}

torch::Tensor focal_loss(const torch::Tensor& logits, const torch::Tensor& target, double alpha, double gamma) {
  return focal_loss_elementwise(logits, target, alpha, gamma).mean();
}

torch::Tensor cxcywh_to_xyxy(const torch::Tensor& b) {
  auto c = b.unbind(-1);
  return torch::stack({c[0] - 0.5 * c[2], c[1] - 0.5 * c[3], c[0] + 0.5 * c[2], c[1] + 0.5 * c[3]}, -1);
}

torch::Tensor xyxy_to_cxcywh(const torch::Tensor& b) {
  auto c = b.unbind(-1);
  return torch::stack({(c[0] + c[2]) / 2, (c[1] + c[3]) / 2, c[2] - c[0], c[3] - c[1]}, -1);
}

torch::Tensor generalized_iou(const torch::Tensor& a, const torch::Tensor& b) {
  VDIT_REQUIRE(a.sizes() == b.sizes() && a.size(-1) == 4, ErrorKind::ShapeMismatch, "giou",
               "expected paired [..., 4] boxes");
  auto A = a.unbind(-1), B = b.unbind(-1);
  auto area_a = (A[2] - A[0]).clamp_min(0) * (A[3] - A[1]).clamp_min(0);
  auto area_b = (B[2] - B[0]).clamp_min(0) * (B[3] - B[1]).clamp_min(0);
  auto iw = (torch::min(A[2], B[2]) - torch::max(A[0], B[0])).clamp_min(0);
  auto ih = (torch::min(A[3], B[3]) - torch::max(A[1], B[1])).clamp_min(0);
  auto inter = iw * ih;
  auto uni = area_a + area_b - inter;
  auto safe_uni = torch::where(uni > 0, uni, torch::ones_like(uni));
  auto iou = torch::where(uni > 0, inter / safe_uni, torch::zeros_like(uni));
  auto enclosure = (torch::max(A[2], B[2]) - torch::min(A[0], B[0])).clamp_min(0) *
                   (torch::max(A[3], B[3]) - torch::min(A[1], B[1])).clamp_min(0);
  auto safe_enc = torch::where(enclosure > 0, enclosure, torch::ones_like(enclosure));
  auto penalty = torch::where(enclosure > 0, (enclosure - uni) / safe_enc, torch::zeros_like(enclosure));
  return iou - penalty;
}

double giou(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  auto ta = torch::tensor({a[0], a[1], a[2], a[3]}, torch::kFloat64);
  auto tb = torch::tensor({b[0], b[1], b[2], b[3]}, torch::kFloat64);
  return generalized_iou(ta, tb).item<double>();
}

VideoTarget VideoTarget::from_pixels(const torch::Tensor& masks_u8, const torch::Tensor& boxes_xyxy,
                                     const std::vector<bool>& valid) {
  VDIT_REQUIRE(masks_u8.dim() == 3 && boxes_xyxy.dim() == 2 && boxes_xyxy.size(0) == masks_u8.size(0) &&
                   static_cast<int64_t>(valid.size()) == masks_u8.size(0),
               ErrorKind::ShapeMismatch, "target", "masks, boxes and valid flags disagree on T");
  const double H = static_cast<double>(masks_u8.size(1)), W = static_cast<double>(masks_u8.size(2));
  VideoTarget t;
  t.masks = masks_u8.to(torch::kFloat32);
  auto scale = torch::tensor({1.0 / W, 1.0 / H, 1.0 / W, 1.0 / H}, torch::kFloat32);
  t.boxes = xyxy_to_cxcywh(boxes_xyxy.to(torch::kFloat32) * scale);
  t.valid = torch::zeros({masks_u8.size(0)}, torch::kBool);
  for (std::size_t i = 0; i < valid.size(); ++i) t.valid[static_cast<int64_t>(i)] = bool(valid[i]);
  return t;
}

torch::Tensor downsample_mask(const torch::Tensor& masks, int factor) {
  VDIT_REQUIRE(masks.dim() == 3 && masks.size(1) % factor == 0 && masks.size(2) % factor == 0,
               ErrorKind::ShapeMismatch, "masks", "mask size must be divisible by the factor");
  using torch::indexing::Slice;
  return masks.index({Slice(), Slice(factor / 2, torch::indexing::None, factor),
                      Slice(factor / 2, torch::indexing::None, factor)});
}

namespace {

torch::Tensor valid_index(const VideoTarget& t) {
  auto idx = t.valid.nonzero().flatten();
  VDIT_REQUIRE(idx.numel() > 0, ErrorKind::InvalidArgument, "target", "ground truth has no valid frame");
  return idx;
}

struct PairTerms {
  torch::Tensor dice, focal, l1, giou;
};

PairTerms pair_terms(const torch::Tensor& masks, const torch::Tensor& boxes, int64_t q, const torch::Tensor& gt_masks,
                     const torch::Tensor& gt_boxes, const torch::Tensor& vt) {
  auto m = masks.select(1, q).index_select(0, vt);
  auto g = gt_masks.index_select(0, vt).to(m.dtype());
  PairTerms p;
  p.dice = dice_loss_batched(m, g).mean();
  p.focal = focal_loss(m, g);
  if (boxes.defined()) {
    auto b = boxes.select(1, q).index_select(0, vt);
    auto gb = gt_boxes.index_select(0, vt).to(b.dtype());
    p.l1 = (b - gb).abs().sum(-1).mean();
    p.giou = (1 - generalized_iou(cxcywh_to_xyxy(b), cxcywh_to_xyxy(gb))).mean();
  }
  return p;
}

}  // namespace

CostMatrix matching_cost(const Predictions& pred, const std::vector<VideoTarget>& targets, const LossWeights& w) {
  VDIT_REQUIRE(!targets.empty(), ErrorKind::InvalidArgument, "targets", "need at least one ground-truth instance");
  torch::NoGradGuard ng;
  const auto Q = pred.queries();
  CostMatrix cost(static_cast<std::size_t>(Q), targets.size());
  for (std::size_t g = 0; g < targets.size(); ++g) {
    const auto& t = targets[g];
    VDIT_REQUIRE(t.masks.size(0) == pred.frames() && t.masks.sizes().slice(1) == pred.masks.sizes().slice(2),
                 ErrorKind::ShapeMismatch, "target " + std::to_string(g), "target does not match predictions");
    auto vt = valid_index(t);
    auto score_target = t.valid.to(pred.scores.dtype());
    for (int64_t q = 0; q < Q; ++q) {
      auto p = pair_terms(pred.masks, pred.boxes, q, t.masks, t.boxes, vt);
      double c = w.mask * (w.dice * p.dice.item<double>() + w.mask_focal * p.focal.item<double>());
      c += w.box * (w.l1 * p.l1.item<double>() + w.giou * p.giou.item<double>());
      c += w.score * w.score_focal * focal_loss(pred.scores.select(1, q), score_target).item<double>();
      cost(static_cast<std::size_t>(q), g) = c;
    }
  }
  return cost;
}

std::vector<std::string> LossBreakdown::column_names() {
  return {"total", "lowres_dice", "lowres_focal", "mask_dice", "mask_focal", "box_l1", "box_giou", "score_focal"};
}

std::vector<double> LossBreakdown::values() const {
  std::vector<double> v;
  for (const auto* t : {&total, &lowres_dice, &lowres_focal, &mask_dice, &mask_focal, &box_l1, &box_giou, &score_focal})
    v.push_back(t->defined() ? t->item<double>() : 0.0);
  return v;
}

LossBreakdown total_loss(const Predictions& pred, const std::vector<VideoTarget>& targets,
                         const Assignment& assignment, const LossWeights& w) {
  VDIT_REQUIRE(!assignment.pairs.empty(), ErrorKind::InvalidArgument, "assignment", "empty assignment");
  const auto opts = pred.masks.options();
  auto zero = torch::zeros({}, opts);
  LossBreakdown out;
  out.lowres_dice = out.lowres_focal = out.mask_dice = out.mask_focal = out.box_l1 = out.box_giou = zero;
  auto score_target = torch::zeros_like(pred.scores);
  for (const auto& [q, g] : assignment.pairs) {
    VDIT_REQUIRE(g < targets.size() && static_cast<int64_t>(q) < pred.queries(), ErrorKind::InvalidArgument,
                 "assignment", "pair index out of range");
    const auto& t = targets[g];
    auto vt = valid_index(t);
    const auto qi = static_cast<int64_t>(q);
    auto full = pair_terms(pred.masks, pred.boxes, qi, t.masks, t.boxes, vt);
    const int factor = static_cast<int>(pred.masks.size(2) / pred.masks_lowres.size(2));
    auto low = pair_terms(pred.masks_lowres, {}, qi, downsample_mask(t.masks, factor), {}, vt);
    out.lowres_dice = out.lowres_dice + low.dice;
    out.lowres_focal = out.lowres_focal + low.focal;
    out.mask_dice = out.mask_dice + full.dice;
    out.mask_focal = out.mask_focal + full.focal;
    out.box_l1 = out.box_l1 + full.l1;
    out.box_giou = out.box_giou + full.giou;
    score_target.select(1, qi).copy_(t.valid.to(score_target.dtype()));
  }
  const double n = static_cast<double>(assignment.pairs.size());
  for (auto* t : {&out.lowres_dice, &out.lowres_focal, &out.mask_dice, &out.mask_focal, &out.box_l1, &out.box_giou})
    *t = *t / n;
  // summed over queries, averaged over frames
  out.score_focal = focal_loss_elementwise(pred.scores, score_target).sum(1).mean();
  out.total = w.mask_lowres * (w.dice * out.lowres_dice + w.mask_focal * out.lowres_focal) +
              w.mask * (w.dice * out.mask_dice + w.mask_focal * out.mask_focal) +
              w.box * (w.l1 * out.box_l1 + w.giou * out.box_giou) + w.score * w.score_focal * out.score_focal;
  return out;
}

}  // namespace vdit
