// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

namespace vdit {

inline constexpr int kLatentChannels = 4;
inline constexpr int kLatentFactor = 8;

struct CodecConfig {
  int stage1_channels = 16;
  int tap_channels = 32;  // C4 of the 4x feature
  int stage3_channels = 32;
  int decoder_channels = 32;
};

/// Per-frame latents and the 4x encoder tap.
struct LatentClip {
  torch::Tensor latents;  // [T, 4, H/8, W/8]
  torch::Tensor feat4x;   // [T, C4, H/4, W/4]
};

/// Convolutional autoencoder: three stride-2 stages down to 8x, tapped after
/// stage two. Frames are [T, 3, H, W]; frames never mix.
class LatentCodecImpl : public torch::nn::Module {
 public:
  explicit LatentCodecImpl(CodecConfig cfg = {});

  LatentClip encode(const torch::Tensor& frames);
  /// Reconstruction clamped to [0, 1].
  torch::Tensor decode(const torch::Tensor& latents);
  /// Affine output before the clamp; the reconstruction loss trains on this.
  torch::Tensor decode_unclamped(const torch::Tensor& latents);

  /// Multiplier applied to raw latents so they have roughly unit variance.
  double latent_scale() const { return latent_scale_.item<double>(); }
  void set_latent_scale(double s);

  const CodecConfig& config() const { return cfg_; }

 private:
  CodecConfig cfg_;
  torch::nn::Conv2d enc1{nullptr}, enc2{nullptr}, enc3{nullptr}, to_latent{nullptr};
  torch::nn::Conv2d dec_in{nullptr}, dec_mid1{nullptr}, dec_mid2{nullptr};
  torch::nn::Conv2d dec_up1{nullptr}, dec_up2{nullptr}, dec_up3{nullptr}, dec_out{nullptr};
  torch::Tensor latent_scale_;
};
TORCH_MODULE(LatentCodec);

/// Peak signal-to-noise ratio in dB for signals in [0, 1].
double psnr(const torch::Tensor& a, const torch::Tensor& b);

}  // namespace vdit
