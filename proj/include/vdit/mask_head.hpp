// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <array>

#include "vdit/nn_blocks.hpp"
#include "vdit/video_unet.hpp"

namespace vdit {

/// Per-frame, per-query outputs. Scores are logits: sigmoid(score) is the
/// probability that the query's object is present in the frame.
struct Predictions {
  torch::Tensor boxes;          // [T, Q, 4] normalized (cx, cy, w, h) in [0, 1]
  torch::Tensor scores;         // [T, Q] logits
  torch::Tensor masks_lowres;   // [T, Q, H/8, W/8] logits (M_o)
  torch::Tensor masks;          // [T, Q, H, W] logits (M)

  int64_t frames() const { return scores.size(0); }
  int64_t queries() const { return scores.size(1); }
};

struct MaskHeadConfig {
  int queries = 5;
  int d_model = 64;
  int heads = 4;
  int encoder_layers = 1;
  int decoder_layers = 2;
  int ffn_dim = 128;
  int text_dim = 64;
  std::array<int, 4> level_channels{32, 32, 64, 96};  // 4x, 8x, 16x, 32x
  int dynamic_channels = 8;
  int refine_channels = 8;
  bool text_positions = true;
  int max_text_tokens = 16;
};

/// Query states and the fused 8x map from the multi-scale transformer.
struct CrossModalFeatures {
  torch::Tensor query_states;  // [T, Q, d]
  torch::Tensor fused_map;     // [T, d, H/8, W/8]
};

/// Number of generated parameters for a dynamic 1x1 conv stack
/// in -> channels -> channels -> 1.
int dynamic_param_count(int in, int channels);

/// Applies per-(frame, query) generated 1x1 convs.
/// features [T, Cin, h, w] (shared) or [T, Q, Cin, h, w],
/// params [T, Q, dynamic_param_count(Cin, channels)] -> [T, Q, h, w]
torch::Tensor dynamic_mask_conv(const torch::Tensor& features, const torch::Tensor& params, int channels);

/// Offsets of the pixel centers of an h x w grid from each query's
/// normalized (cx, cy). centers [T, Q, 2] -> [T, Q, 2, h, w]
torch::Tensor relative_coordinates(const torch::Tensor& centers, int64_t h, int64_t w);

/// Post-norm transformer decoder layer: query self-attention, cross-attention
/// to memory, feed-forward.
class DecoderLayerImpl : public torch::nn::Module {
 public:
  DecoderLayerImpl(int d, int heads, int ffn);
  torch::Tensor forward(const torch::Tensor& queries, const torch::Tensor& memory,
                        const torch::Tensor& memory_pos);

  MultiHeadAttention self_attn{nullptr}, cross_attn{nullptr};
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr}, norm3{nullptr};
  FeedForward ffn{nullptr};
};
TORCH_MODULE(DecoderLayer);

class EncoderLayerImpl : public torch::nn::Module {
 public:
  EncoderLayerImpl(int d, int heads, int ffn);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& pos);

  MultiHeadAttention attn{nullptr};
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  FeedForward ffn{nullptr};
};
TORCH_MODULE(EncoderLayer);

/// Query-based mask head: text-instance matching, dense multi-scale
/// vision-language fusion, and box / class / dynamic-mask sub-heads.
class MaskHeadImpl : public torch::nn::Module {
 public:
  explicit MaskHeadImpl(MaskHeadConfig cfg = {});

  struct Matching {
    torch::Tensor queries;  // q_e [Q, d]
    torch::Tensor weights;  // [Q, L] (mean over heads)
  };
  /// word_features F_e [L, text_dim] -> q_e
  Matching text_instance_matching(const torch::Tensor& word_features);

  /// Encodes the 8x/16x/32x levels and decodes q_e replicated per frame.
  CrossModalFeatures vision_language_fusion(const FeaturePyramid& pyramid, const torch::Tensor& q_e);

  Predictions decode_predictions(const CrossModalFeatures& features, const FeaturePyramid& pyramid);

  Predictions forward(const FeaturePyramid& pyramid, const torch::Tensor& word_features);

  const MaskHeadConfig& config() const { return cfg_; }

  // text-instance matching
  torch::Tensor query_embed;  // q_o [Q, d]
  torch::nn::Linear text_proj{nullptr};
  torch::Tensor text_positions;
  MultiHeadAttention match_attn{nullptr};
  torch::nn::LayerNorm match_norm1{nullptr}, match_norm2{nullptr};
  FeedForward match_ffn{nullptr};
  // fusion
  std::array<torch::nn::Conv2d, 3> input_proj{nullptr, nullptr, nullptr};
  torch::Tensor level_embed;  // [3, d]
  torch::nn::ModuleList encoder{nullptr};
  torch::nn::ModuleList decoder{nullptr};
  // sub-heads
  torch::nn::Linear box1{nullptr}, box2{nullptr}, box3{nullptr};
  torch::nn::Linear class_head{nullptr};
  torch::nn::Conv2d mask_feat{nullptr};
  torch::nn::Linear controller{nullptr};
  // upsampling refinement: three x2 stages, pyramid fusion before stages 1 and 3
  torch::nn::Conv2d fuse8{nullptr}, fuse4{nullptr};
  torch::nn::Conv2d refine1{nullptr}, refine2{nullptr}, refine3{nullptr}, refine_out{nullptr};

 private:
  MaskHeadConfig cfg_;
};
TORCH_MODULE(MaskHead);

/// argmax over queries of mean_t sigmoid(scores[t, q]); ties -> lowest index.
int64_t select_instance(const torch::Tensor& scores);

}  // namespace vdit
