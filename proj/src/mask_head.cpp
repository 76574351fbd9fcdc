// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/mask_head.hpp"

#include <string>

#include "vdit/error.hpp"

namespace vdit {

namespace F = torch::nn::functional;

namespace {

torch::Tensor resize(const torch::Tensor& x, int64_t h, int64_t w, bool nearest = false) {
  auto opts = F::InterpolateFuncOptions().size(std::vector<int64_t>{h, w});
  if (nearest) return F::interpolate(x, opts.mode(torch::kNearest));
  return F::interpolate(x, opts.mode(torch::kBilinear).align_corners(false));
}

torch::Tensor up2(const torch::Tensor& x) { return resize(x, x.size(2) * 2, x.size(3) * 2); }

torch::nn::Conv2d conv(int in, int out, int k) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).padding(k / 2));
}

torch::nn::LayerNorm layer_norm(int d) { return torch::nn::LayerNorm(torch::nn::LayerNormOptions({d})); }

}  // namespace

int dynamic_param_count(int in, int c) { return c * in + c + c * c + c + c + 1; }

torch::Tensor dynamic_mask_conv(const torch::Tensor& features, const torch::Tensor& params, int channels) {
  VDIT_REQUIRE((features.dim() == 4 || features.dim() == 5) && params.dim() == 3 &&
                   features.size(0) == params.size(0),
               ErrorKind::ShapeMismatch, "dynamic conv", "expected features [T, (Q,) C, h, w] and params [T, Q, P]");
  const auto T = params.size(0), Q = params.size(1);
  auto f = features.dim() == 4 ? features.unsqueeze(1).expand({T, Q, features.size(1), features.size(2),
                                                                 features.size(3)})
                               : features;
  VDIT_REQUIRE(f.size(1) == Q, ErrorKind::ShapeMismatch, "dynamic conv", "query count differs");
  const int64_t in = f.size(2), c = channels;
  VDIT_REQUIRE(params.size(2) == dynamic_param_count(static_cast<int>(in), channels), ErrorKind::ShapeMismatch,
               std::to_string(params.size(2)), "generated parameter count does not match channels");
  int64_t off = 0;
  auto take = [&](int64_t n) {
    auto s = params.narrow(2, off, n);
    off += n;
    return s;
  };
  auto w1 = take(c * in).view({T, Q, c, in});
  auto b1 = take(c).view({T, Q, c, 1, 1});
  auto w2 = take(c * c).view({T, Q, c, c});
  auto b2 = take(c).view({T, Q, c, 1, 1});
  auto w3 = take(c).view({T, Q, 1, c});
  auto b3 = take(1).view({T, Q, 1, 1, 1});
  auto x = torch::relu(torch::einsum("tqoc,tqchw->tqohw", {w1, f}) + b1);
  x = torch::relu(torch::einsum("tqoc,tqchw->tqohw", {w2, x}) + b2);
  x = torch::einsum("tqoc,tqchw->tqohw", {w3, x}) + b3;
  return x.squeeze(2);
}

torch::Tensor relative_coordinates(const torch::Tensor& centers, int64_t h, int64_t w) {
  VDIT_REQUIRE(centers.dim() == 3 && centers.size(2) == 2, ErrorKind::ShapeMismatch, "centers",
               "expected [T, Q, 2]");
  const auto o = centers.options();
  auto xs = (torch::arange(w, o) + 0.5) / static_cast<double>(w);
  auto ys = (torch::arange(h, o) + 0.5) / static_cast<double>(h);
  auto cx = centers.select(2, 0).unsqueeze(-1).unsqueeze(-1);
  auto cy = centers.select(2, 1).unsqueeze(-1).unsqueeze(-1);
  auto dx = (xs.view({1, 1, 1, w}) - cx).expand({centers.size(0), centers.size(1), h, w});
  auto dy = (ys.view({1, 1, h, 1}) - cy).expand({centers.size(0), centers.size(1), h, w});
  return torch::stack({dx, dy}, 2);
}

DecoderLayerImpl::DecoderLayerImpl(int d, int heads, int ffn_dim) {
  self_attn = register_module("self_attn", MultiHeadAttention(d, d, heads));
  cross_attn = register_module("cross_attn", MultiHeadAttention(d, d, heads));
  norm1 = register_module("norm1", layer_norm(d));
  norm2 = register_module("norm2", layer_norm(d));
  norm3 = register_module("norm3", layer_norm(d));
  ffn = register_module("ffn", FeedForward(d, ffn_dim));
}

torch::Tensor DecoderLayerImpl::forward(const torch::Tensor& queries, const torch::Tensor& memory,
                                        const torch::Tensor& memory_pos) {
  auto q = norm1(queries + self_attn->forward(queries, queries, queries).output);
  q = norm2(q + cross_attn->forward(q, memory + memory_pos, memory).output);
  return norm3(q + ffn(q));
}

EncoderLayerImpl::EncoderLayerImpl(int d, int heads, int ffn_dim) {
  attn = register_module("attn", MultiHeadAttention(d, d, heads));
  norm1 = register_module("norm1", layer_norm(d));
  norm2 = register_module("norm2", layer_norm(d));
  ffn = register_module("ffn", FeedForward(d, ffn_dim));
}

torch::Tensor EncoderLayerImpl::forward(const torch::Tensor& x, const torch::Tensor& pos) {
  auto qk = x + pos;
  auto y = norm1(x + attn->forward(qk, qk, x).output);
  return norm2(y + ffn(y));
}

MaskHeadImpl::MaskHeadImpl(MaskHeadConfig cfg) : cfg_(cfg) {
  VDIT_REQUIRE(cfg.queries >= 1, ErrorKind::InvalidArgument, std::to_string(cfg.queries), "need Q >= 1");
  const int d = cfg.d_model;
  query_embed = register_parameter("query_embed", torch::randn({cfg.queries, d}));
  text_proj = register_module("text_proj", torch::nn::Linear(cfg.text_dim, d));
  text_positions = register_parameter("text_positions", torch::randn({cfg.max_text_tokens, d}) * 0.1);
  match_attn = register_module("match_attn", MultiHeadAttention(d, d, cfg.heads));
  match_norm1 = register_module("match_norm1", layer_norm(d));
  match_norm2 = register_module("match_norm2", layer_norm(d));
  match_ffn = register_module("match_ffn", FeedForward(d, cfg.ffn_dim));

  for (std::size_t i = 0; i < 3; ++i)
    input_proj[i] = register_module("input_proj" + std::to_string(i),
                                    conv(cfg.level_channels[i + 1], d, 1));
  level_embed = register_parameter("level_embed", torch::randn({3, d}) * 0.1);
  encoder = register_module("encoder", torch::nn::ModuleList());
  for (int i = 0; i < cfg.encoder_layers; ++i) encoder->push_back(EncoderLayer(d, cfg.heads, cfg.ffn_dim));
  decoder = register_module("decoder", torch::nn::ModuleList());
  for (int i = 0; i < cfg.decoder_layers; ++i) decoder->push_back(DecoderLayer(d, cfg.heads, cfg.ffn_dim));

  box1 = register_module("box1", torch::nn::Linear(d, d));
  box2 = register_module("box2", torch::nn::Linear(d, d));
  box3 = register_module("box3", torch::nn::Linear(d, 4));
  class_head = register_module("class_head", torch::nn::Linear(d, 1));
  const int cm = cfg.dynamic_channels;
  mask_feat = register_module("mask_feat", conv(d, cm, 1));
  controller = register_module("controller", torch::nn::Linear(d, dynamic_param_count(cm + 2, cm)));

  const int r = cfg.refine_channels;
  fuse8 = register_module("fuse8", conv(cfg.level_channels[1], r, 1));
  fuse4 = register_module("fuse4", conv(cfg.level_channels[0], r, 1));
  refine1 = register_module("refine1", conv(1 + r, r, 3));
  refine2 = register_module("refine2", conv(r, r, 3));
  refine3 = register_module("refine3", conv(2 * r, r, 3));
  refine_out = register_module("refine_out", conv(r, 1, 3));
  torch::NoGradGuard ng;
  refine_out->weight.zero_();
  refine_out->bias.zero_();
}

MaskHeadImpl::Matching MaskHeadImpl::text_instance_matching(const torch::Tensor& word_features) {
  VDIT_REQUIRE(word_features.dim() == 2 && word_features.size(0) >= 1, ErrorKind::InvalidArgument,
               "word_features", "empty referring text");
  VDIT_REQUIRE(word_features.size(1) == cfg_.text_dim, ErrorKind::ShapeMismatch,
               std::to_string(word_features.size(1)), "word feature width differs from text_dim");
  const auto L = word_features.size(0);
  VDIT_REQUIRE(L <= cfg_.max_text_tokens, ErrorKind::InvalidArgument, std::to_string(L), "text too long");
  auto values = text_proj(word_features).unsqueeze(0);
  auto keys = cfg_.text_positions ? values + text_positions.slice(0, 0, L).unsqueeze(0) : values;
  auto q_o = query_embed.unsqueeze(0);
  auto r = match_attn->forward(q_o, keys, values);
  auto q = match_norm1(q_o + r.output);
  q = match_norm2(q + match_ffn(q));
  return {q.squeeze(0), r.weights.squeeze(0)};
}

CrossModalFeatures MaskHeadImpl::vision_language_fusion(const FeaturePyramid& pyramid, const torch::Tensor& q_e) {
  const int d = cfg_.d_model;
  VDIT_REQUIRE(q_e.dim() == 2 && q_e.size(1) == d, ErrorKind::ShapeMismatch, "q_e", "expected [Q, d] queries");
  const auto T = pyramid.frames();
  std::vector<torch::Tensor> tokens, positions;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& level = pyramid.levels[i + 1];
    VDIT_REQUIRE(level.dim() == 4 && level.size(0) == T && level.size(1) == cfg_.level_channels[i + 1],
                 ErrorKind::ShapeMismatch, "pyramid level " + std::to_string(i + 1),
                 "unexpected level shape");
    auto x = input_proj[i](level);
    const auto h = x.size(2), w = x.size(3);
    tokens.push_back(x.flatten(2).transpose(1, 2));
    positions.push_back(sine_position_encoding_2d(static_cast<int>(h), static_cast<int>(w), d).to(level.dtype()) +
                        level_embed[static_cast<int64_t>(i)]);
  }
  auto memory = torch::cat(tokens, 1);                  // [T, N, d]
  auto pos = torch::cat(positions, 0).unsqueeze(0);     // [1, N, d]
  for (auto& layer : *encoder) memory = layer->as<EncoderLayer>()->forward(memory, pos);

  auto queries = q_e.unsqueeze(0).expand({T, q_e.size(0), d});
  for (auto& layer : *decoder) queries = layer->as<DecoderLayer>()->forward(queries, memory, pos);

  const auto h8 = pyramid.levels[1].size(2), w8 = pyramid.levels[1].size(3);
  auto fused = memory.narrow(1, 0, h8 * w8).transpose(1, 2).reshape({T, d, h8, w8});
  return {queries, fused};
}

Predictions MaskHeadImpl::decode_predictions(const CrossModalFeatures& features, const FeaturePyramid& pyramid) {
  const auto& qs = features.query_states;
  const auto T = qs.size(0), Q = qs.size(1);
  Predictions p;
  p.boxes = torch::sigmoid(box3(torch::relu(box2(torch::relu(box1(qs))))));
  p.scores = class_head(qs).squeeze(-1);
  const auto& fused = features.fused_map;
  const auto h = fused.size(2), w = fused.size(3);
  auto shared = mask_feat(fused);
  auto mf = torch::cat({shared.unsqueeze(1).expand({T, Q, shared.size(1), h, w}),
                        relative_coordinates(p.boxes.narrow(2, 0, 2), h, w)},
                       2);
  p.masks_lowres = dynamic_mask_conv(mf, controller(qs), cfg_.dynamic_channels);

  auto per_query = [&](const torch::Tensor& f) {  // [T, r, a, b] -> [T*Q, r, a, b]
    return f.unsqueeze(1).expand({T, Q, f.size(1), f.size(2), f.size(3)}).reshape({T * Q, f.size(1), f.size(2), f.size(3)});
  };
  auto m = p.masks_lowres.reshape({T * Q, 1, h, w});
  auto x = torch::relu(refine1(torch::cat({m, per_query(fuse8(pyramid.levels[1]))}, 1)));
  x = torch::relu(refine2(up2(x)));
  x = up2(x);
  auto f4 = up2(fuse4(pyramid.levels[0]));
  VDIT_REQUIRE(f4.size(2) == x.size(2) && f4.size(3) == x.size(3), ErrorKind::ShapeMismatch, "pyramid level 0",
               "4x feature does not align with the refinement path");
  x = torch::relu(refine3(torch::cat({x, per_query(f4)}, 1)));
  x = up2(x);
  auto full = resize(m, h * 8, w * 8) + refine_out(x);
  p.masks = full.view({T, Q, h * 8, w * 8});
  return p;
}

Predictions MaskHeadImpl::forward(const FeaturePyramid& pyramid, const torch::Tensor& word_features) {
  auto q_e = text_instance_matching(word_features).queries;
  return decode_predictions(vision_language_fusion(pyramid, q_e), pyramid);
}

int64_t select_instance(const torch::Tensor& scores) {
  VDIT_REQUIRE(scores.dim() == 2 && scores.size(1) >= 1, ErrorKind::ShapeMismatch, "scores", "expected [T, Q]");
  auto mean = torch::sigmoid(scores.detach().to(torch::kFloat64)).mean(0);
  const auto acc = mean.accessor<double, 1>();
  int64_t best = 0;
  for (int64_t q = 1; q < mean.size(0); ++q)
    if (acc[q] > acc[best]) best = q;
  return best;
}

}  // namespace vdit
