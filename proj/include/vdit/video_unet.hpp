// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <array>

#include "vdit/nn_blocks.hpp"

namespace vdit {

struct UNetConfig {
  int in_channels = 4;
  int base_channels = 32;
  std::array<int, 3> level_channels{32, 64, 96};
  int attention_heads = 2;
  bool temporal_attention = true;
  int max_frames = 16;
  int context_dim = 64;
  int time_embed_dim = 128;
  int groups = 8;
};

/// Residual unit: GN-SiLU-conv, step-embedding shift, GN-SiLU-conv, skip.
class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int in, int out, int time_dim, int groups);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& temb);

  torch::nn::GroupNorm norm1{nullptr}, norm2{nullptr};
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, skip{nullptr};
  torch::nn::Linear time_proj{nullptr};
};
TORCH_MODULE(ResBlock);

/// Spatial tokens attend to the prompt tokens of their own frame, then a
/// feed-forward layer.
class SpatialCrossAttentionImpl : public torch::nn::Module {
 public:
  SpatialCrossAttentionImpl(int channels, int context_dim, int heads, int groups);
  /// x [T, C, h, w], context [T, L, Cctx]
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& context);

  torch::nn::GroupNorm norm{nullptr};
  torch::nn::LayerNorm norm_ff{nullptr};
  MultiHeadAttention attn{nullptr};
  FeedForward ff{nullptr};
};
TORCH_MODULE(SpatialCrossAttention);

/// Self-attention along the frame axis at every spatial position, with
/// learned temporal position embeddings.
class TemporalAttentionImpl : public torch::nn::Module {
 public:
  TemporalAttentionImpl(int channels, int heads, int max_frames);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::LayerNorm norm{nullptr};
  torch::Tensor positions;  // [max_frames, C]
  MultiHeadAttention attn{nullptr};
};
TORCH_MODULE(TemporalAttention);

struct UNetOutput {
  torch::Tensor noise_prediction;      // [T, 4, h, w], undefined when skipped
  std::array<torch::Tensor, 3> taps;   // 8x, 16x, 32x of pixel resolution
};

/// Tiny spatio-temporal denoising U-Net over [T, 4, h, w] latents with
/// per-frame prompts [T, L, context_dim]. Each down level is
/// res -> cross-attn -> temporal-attn -> res; the side output is taken after
/// the level's last residual unit.
class VideoUNetImpl : public torch::nn::Module {
 public:
  explicit VideoUNetImpl(UNetConfig cfg = {});

  UNetOutput forward(const torch::Tensor& noisy, const torch::Tensor& prompts, int step,
                     bool with_decoder = true);
  /// Side outputs only (down path).
  std::array<torch::Tensor, 3> extract_features(const torch::Tensor& noisy, const torch::Tensor& prompts,
                                                int step) {
    return forward(noisy, prompts, step, false).taps;
  }

  const UNetConfig& config() const { return cfg_; }
  /// Zeroes the temporal position tables (permutation probe).
  void clear_temporal_positions();

 private:
  UNetConfig cfg_;
  torch::nn::Linear time1{nullptr}, time2{nullptr};
  torch::nn::Conv2d conv_in{nullptr};
  std::array<ResBlock, 3> down_res1{nullptr, nullptr, nullptr};
  std::array<ResBlock, 3> down_res2{nullptr, nullptr, nullptr};
  std::array<SpatialCrossAttention, 3> down_xattn{nullptr, nullptr, nullptr};
  std::array<TemporalAttention, 3> down_temporal{nullptr, nullptr, nullptr};
  std::array<torch::nn::Conv2d, 2> downsample{nullptr, nullptr};
  ResBlock mid{nullptr};
  std::array<torch::nn::Conv2d, 2> upsample{nullptr, nullptr};
  std::array<ResBlock, 2> up_res{nullptr, nullptr};
  std::array<SpatialCrossAttention, 2> up_xattn{nullptr, nullptr};
  torch::nn::GroupNorm norm_out{nullptr};
  torch::nn::Conv2d conv_out{nullptr};
};
TORCH_MODULE(VideoUNet);

/// Four-level visual feature pyramid, fine to coarse: 4x, 8x, 16x, 32x.
struct FeaturePyramid {
  std::array<torch::Tensor, 4> levels;  // each [T, C_l, H/l, W/l]
  int64_t frames() const { return levels[0].size(0); }
};

/// Orders the codec's 4x tap with the U-Net side outputs; no parameters.
FeaturePyramid assemble_pyramid(const std::array<torch::Tensor, 3>& side_outputs, const torch::Tensor& feat4x);

}  // namespace vdit
