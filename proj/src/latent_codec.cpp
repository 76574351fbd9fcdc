// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/latent_codec.hpp"

#include <cmath>

#include "vdit/error.hpp"

namespace vdit {

namespace {

torch::nn::Conv2d conv(int in, int out, int k, int stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).stride(stride).padding(k / 2));
}

torch::Tensor up2(const torch::Tensor& x) {
  return torch::nn::functional::interpolate(
      x, torch::nn::functional::InterpolateFuncOptions()
             .scale_factor(std::vector<double>{2.0, 2.0})
             .mode(torch::kNearest));
}

}  // namespace

LatentCodecImpl::LatentCodecImpl(CodecConfig cfg) : cfg_(cfg) {
  enc1 = register_module("enc1", conv(3, cfg.stage1_channels, 3, 2));
  enc2 = register_module("enc2", conv(cfg.stage1_channels, cfg.tap_channels, 3, 2));
  enc3 = register_module("enc3", conv(cfg.tap_channels, cfg.stage3_channels, 3, 2));
  to_latent = register_module("to_latent", conv(cfg.stage3_channels, kLatentChannels, 1));

  const int c = cfg.decoder_channels;
  dec_in = register_module("dec_in", conv(kLatentChannels, c, 3));
  dec_mid1 = register_module("dec_mid1", conv(c, c, 3));
  dec_mid2 = register_module("dec_mid2", conv(c, c, 3));
  dec_up1 = register_module("dec_up1", conv(c, c, 3));
  dec_up2 = register_module("dec_up2", conv(c, c / 2, 3));
  dec_up3 = register_module("dec_up3", conv(c / 2, c / 2, 3));
  dec_out = register_module("dec_out", conv(c / 2, 3, 3));
  latent_scale_ = register_buffer("latent_scale", torch::ones({1}));
}

void LatentCodecImpl::set_latent_scale(double s) {
  torch::NoGradGuard ng;
  latent_scale_.fill_(s);
}

LatentClip LatentCodecImpl::encode(const torch::Tensor& frames) {
  VDIT_REQUIRE(frames.dim() == 4 && frames.size(1) == 3, ErrorKind::ShapeMismatch, "frames",
               "expected [T, 3, H, W]");
  VDIT_REQUIRE(frames.size(2) % kLatentFactor == 0 && frames.size(3) % kLatentFactor == 0,
               ErrorKind::InvalidArgument,
               std::to_string(frames.size(2)) + "x" + std::to_string(frames.size(3)),
               "resolution must be divisible by 8");
  auto x = frames * 2.0 - 1.0;
  auto h = torch::silu(enc1(x));
  auto tap = torch::silu(enc2(h));
  h = torch::silu(enc3(tap));
  auto z = to_latent(h) * latent_scale_.to(h.dtype());
  return {z, tap};
}

torch::Tensor LatentCodecImpl::decode(const torch::Tensor& latents) {
  return decode_unclamped(latents).clamp(0.0, 1.0);
}

torch::Tensor LatentCodecImpl::decode_unclamped(const torch::Tensor& latents) {
  VDIT_REQUIRE(latents.dim() == 4 && latents.size(1) == kLatentChannels, ErrorKind::ShapeMismatch,
               "latents", "expected [T, 4, h, w]");
  auto z = latents / latent_scale_.to(latents.dtype());
  auto h = torch::silu(dec_in(z));
  h = h + dec_mid2(torch::silu(dec_mid1(h)));
  h = torch::silu(dec_up1(up2(h)));
  h = torch::silu(dec_up2(up2(h)));
  h = torch::silu(dec_up3(up2(h)));
  return dec_out(h) + 0.5;
}

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  const double mse = (a - b).pow(2).mean().item<double>();
  return mse <= 0 ? std::numeric_limits<double>::infinity() : -10.0 * std::log10(mse);
}

}  // namespace vdit
