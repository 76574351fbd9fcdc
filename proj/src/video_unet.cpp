// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/video_unet.hpp"

#include <string>

#include "vdit/error.hpp"

namespace vdit {

namespace {

torch::nn::Conv2d conv3(int in, int out, int stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1));
}

torch::nn::GroupNorm group_norm(int groups, int channels) {
  return torch::nn::GroupNorm(torch::nn::GroupNormOptions(std::min(groups, channels), channels));
}

void zero_(torch::nn::Linear& l) {
  torch::NoGradGuard ng;
  l->weight.zero_();
  if (l->bias.defined()) l->bias.zero_();
}

}  // namespace

ResBlockImpl::ResBlockImpl(int in, int out, int time_dim, int groups) {
  norm1 = register_module("norm1", group_norm(groups, in));
  conv1 = register_module("conv1", conv3(in, out));
  time_proj = register_module("time_proj", torch::nn::Linear(time_dim, out));
  norm2 = register_module("norm2", group_norm(groups, out));
  conv2 = register_module("conv2", conv3(out, out));
  if (in != out)
    skip = register_module("skip", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1)));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& temb) {
  auto h = conv1(torch::silu(norm1(x)));
  h = h + time_proj(torch::silu(temb)).view({1, -1, 1, 1});
  h = conv2(torch::silu(norm2(h)));
  return (skip ? skip(x) : x) + h;
}

SpatialCrossAttentionImpl::SpatialCrossAttentionImpl(int channels, int context_dim, int heads, int groups) {
  norm = register_module("norm", group_norm(groups, channels));
  attn = register_module("attn", MultiHeadAttention(channels, context_dim, heads));
  norm_ff = register_module("norm_ff", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  ff = register_module("ff", FeedForward(channels, channels * 2));
}

torch::Tensor SpatialCrossAttentionImpl::forward(const torch::Tensor& x, const torch::Tensor& context) {
  const auto T = x.size(0), C = x.size(1), h = x.size(2), w = x.size(3);
  VDIT_REQUIRE(context.dim() == 3 && context.size(0) == T, ErrorKind::ShapeMismatch, "prompts",
               "expected one prompt sequence per frame");
  auto tokens = norm(x).flatten(2).transpose(1, 2);  // [T, hw, C]
  auto y = x.flatten(2).transpose(1, 2) + attn->forward(tokens, context);
  y = y + ff(norm_ff(y));
  return y.transpose(1, 2).reshape({T, C, h, w});
}

TemporalAttentionImpl::TemporalAttentionImpl(int channels, int heads, int max_frames) {
  norm = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({channels})));
  positions = register_parameter("positions", torch::randn({max_frames, channels}) * 0.02);
  attn = register_module("attn", MultiHeadAttention(channels, channels, heads));
  zero_(attn->to_out);
}

torch::Tensor TemporalAttentionImpl::forward(const torch::Tensor& x) {
  const auto T = x.size(0), C = x.size(1), h = x.size(2), w = x.size(3);
  VDIT_REQUIRE(T <= positions.size(0), ErrorKind::InvalidArgument, std::to_string(T),
               "more frames than temporal position slots");
  auto seq = x.permute({2, 3, 0, 1}).reshape({h * w, T, C});  // [hw, T, C]
  auto q = norm(seq + positions.slice(0, 0, T).unsqueeze(0));
  seq = seq + attn->forward(q, q, q).output;
  return seq.reshape({h, w, T, C}).permute({2, 3, 0, 1}).contiguous();
}

VideoUNetImpl::VideoUNetImpl(UNetConfig cfg) : cfg_(cfg) {
  const int td = cfg.time_embed_dim;
  time1 = register_module("time1", torch::nn::Linear(32, td));
  time2 = register_module("time2", torch::nn::Linear(td, td));
  conv_in = register_module("conv_in", conv3(cfg.in_channels, cfg.base_channels));

  int prev = cfg.base_channels;
  for (std::size_t l = 0; l < 3; ++l) {
    const int c = cfg.level_channels[l];
    const auto tag = std::to_string(l);
    down_res1[l] = register_module("down" + tag + "_res1", ResBlock(prev, c, td, cfg.groups));
    down_xattn[l] = register_module("down" + tag + "_xattn",
                                    SpatialCrossAttention(c, cfg.context_dim, cfg.attention_heads, cfg.groups));
    down_temporal[l] =
        register_module("down" + tag + "_temporal", TemporalAttention(c, cfg.attention_heads, cfg.max_frames));
    down_res2[l] = register_module("down" + tag + "_res2", ResBlock(c, c, td, cfg.groups));
    if (l < 2) downsample[l] = register_module("downsample" + tag, conv3(c, c, 2));
    prev = c;
  }
  const auto& lc = cfg.level_channels;
  mid = register_module("mid", ResBlock(lc[2], lc[2], td, cfg.groups));
  // up path: 32x -> 16x -> 8x
  upsample[0] = register_module("upsample0", conv3(lc[2], lc[2]));
  up_res[0] = register_module("up0_res", ResBlock(lc[2] + lc[1], lc[1], td, cfg.groups));
  up_xattn[0] = register_module("up0_xattn",
                                SpatialCrossAttention(lc[1], cfg.context_dim, cfg.attention_heads, cfg.groups));
  upsample[1] = register_module("upsample1", conv3(lc[1], lc[1]));
  up_res[1] = register_module("up1_res", ResBlock(lc[1] + lc[0], lc[0], td, cfg.groups));
  up_xattn[1] = register_module("up1_xattn",
                                SpatialCrossAttention(lc[0], cfg.context_dim, cfg.attention_heads, cfg.groups));
  norm_out = register_module("norm_out", group_norm(cfg.groups, lc[0]));
  conv_out = register_module("conv_out", conv3(lc[0], cfg.in_channels));
  torch::NoGradGuard ng;
  conv_out->weight.zero_();
  conv_out->bias.zero_();
}

void VideoUNetImpl::clear_temporal_positions() {
  torch::NoGradGuard ng;
  for (auto& t : down_temporal) t->positions.zero_();
}

UNetOutput VideoUNetImpl::forward(const torch::Tensor& noisy, const torch::Tensor& prompts, int step,
                                  bool with_decoder) {
  VDIT_REQUIRE(noisy.dim() == 4 && noisy.size(1) == cfg_.in_channels, ErrorKind::ShapeMismatch, "noisy",
               "expected [T, 4, h, w] latents");
  VDIT_REQUIRE(noisy.size(0) >= 1, ErrorKind::InvalidArgument, "T", "need at least one frame");
  VDIT_REQUIRE(prompts.dim() == 3 && prompts.size(2) == cfg_.context_dim, ErrorKind::ShapeMismatch,
               "prompts", "prompt channel dim must equal the cross-attention width " +
                              std::to_string(cfg_.context_dim));
  VDIT_REQUIRE(prompts.size(0) == noisy.size(0), ErrorKind::ShapeMismatch, "prompts",
               "one prompt sequence per frame required");
  VDIT_REQUIRE(noisy.size(2) % 4 == 0 && noisy.size(3) % 4 == 0, ErrorKind::InvalidArgument, "latents",
               "latent size must be divisible by 4");

  auto temb = timestep_embedding(step, 32).to(noisy.dtype()).unsqueeze(0);
  temb = time2(torch::silu(time1(temb)));

  UNetOutput out;
  auto h = conv_in(noisy);
  for (std::size_t l = 0; l < 3; ++l) {
    h = down_res1[l]->forward(h, temb);
    h = down_xattn[l]->forward(h, prompts);
    if (cfg_.temporal_attention) h = down_temporal[l]->forward(h);
    h = down_res2[l]->forward(h, temb);
    out.taps[l] = h;
    if (l < 2) h = downsample[l](h);
  }
  if (!with_decoder) return out;

  namespace F = torch::nn::functional;
  auto up = [](const torch::Tensor& x) {
    return F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest));
  };
  h = mid->forward(h, temb);
  for (std::size_t u = 0; u < 2; ++u) {
    h = upsample[u](up(h));
    h = torch::cat({h, out.taps[1 - u]}, 1);
    h = up_res[u]->forward(h, temb);
    h = up_xattn[u]->forward(h, prompts);
  }
  out.noise_prediction = conv_out(torch::silu(norm_out(h)));
  return out;
}

FeaturePyramid assemble_pyramid(const std::array<torch::Tensor, 3>& side_outputs, const torch::Tensor& feat4x) {
  VDIT_REQUIRE(feat4x.dim() == 4, ErrorKind::ShapeMismatch, "feat4x", "expected [T, C, H/4, W/4]");
  FeaturePyramid p;
  p.levels[0] = feat4x;
  const auto T = feat4x.size(0);
  const auto H4 = feat4x.size(2), W4 = feat4x.size(3);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& s = side_outputs[l];
    const int64_t factor = int64_t{2} << l;  // 2, 4, 8 relative to the 4x level
    VDIT_REQUIRE(s.dim() == 4 && s.size(0) == T && s.size(2) * factor == H4 && s.size(3) * factor == W4,
                 ErrorKind::ShapeMismatch, "level " + std::to_string(l + 1),
                 "side output resolution inconsistent with the 4x feature");
    p.levels[l + 1] = s;
  }
  return p;
}

}  // namespace vdit
