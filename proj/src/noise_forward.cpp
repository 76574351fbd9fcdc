// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/noise_forward.hpp"

#include <cmath>

#include "vdit/error.hpp"
#include "vdit/latent_codec.hpp"

namespace vdit {

std::string_view to_string(BlendConvention c) { return c == BlendConvention::Literal ? "literal" : "sqrt"; }
std::string_view to_string(NoiseKind k) { return k == NoiseKind::Predicted ? "predicted" : "gaussian"; }

BlendConvention parse_convention(std::string_view s) {
  if (s == "literal") return BlendConvention::Literal;
  if (s == "sqrt") return BlendConvention::Sqrt;
  throw Error(ErrorKind::InvalidArgument, std::string(s), "unknown blend convention");
}

NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "predicted") return NoiseKind::Predicted;
  if (s == "gaussian") return NoiseKind::Gaussian;
  throw Error(ErrorKind::InvalidArgument, std::string(s), "unknown noise kind");
}

NoiseSchedule::NoiseSchedule(const ScheduleConfig& cfg) {
  VDIT_REQUIRE(cfg.num_steps >= 2, ErrorKind::InvalidArgument, std::to_string(cfg.num_steps),
               "schedule needs at least two steps");
  VDIT_REQUIRE(cfg.beta_start > 0 && cfg.beta_end < 1 && cfg.beta_start < cfg.beta_end,
               ErrorKind::InvalidArgument, "beta", "betas must satisfy 0 < start < end < 1");
  double prod = 1.0;
  for (int i = 0; i < cfg.num_steps; ++i) {
    const double b = cfg.beta_start + (cfg.beta_end - cfg.beta_start) * i / (cfg.num_steps - 1);
    beta_.push_back(b);
    prod *= 1.0 - b;
    alpha_bar_.push_back(prod);
  }
}

double NoiseSchedule::beta(int step) const {
  VDIT_REQUIRE(step >= 0 && step < num_steps(), ErrorKind::InvalidArgument, std::to_string(step),
               "step outside the schedule range");
  return beta_[static_cast<std::size_t>(step)];
}

double NoiseSchedule::alpha(int step) const {
  VDIT_REQUIRE(step >= 0 && step < num_steps(), ErrorKind::InvalidArgument, std::to_string(step),
               "step outside the schedule range");
  return alpha_bar_[static_cast<std::size_t>(step)];
}

std::pair<double, double> NoiseSchedule::blend_coefficients(int step, BlendConvention convention) const {
  const double a = alpha(step);
  if (convention == BlendConvention::Literal) return {a, 1.0 - a};
  return {std::sqrt(a), std::sqrt(1.0 - a)};
}

torch::Tensor normalize_per_frame(const torch::Tensor& x, double eps) {
  VDIT_REQUIRE(x.dim() >= 2, ErrorKind::ShapeMismatch, "x", "expected a per-frame tensor");
  auto flat = x.flatten(1);
  auto mean = flat.mean(1, /*keepdim=*/true);
  auto centered = flat - mean;
  auto sigma = centered.pow(2).mean(1, true).sqrt();
  return (centered / (sigma + eps)).view(x.sizes());
}

NoisePredictorImpl::NoisePredictorImpl() {
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(kLatentChannels, kLatentChannels, 3).padding(1)));
  w_n = register_parameter("w_n", torch::eye(kLatentChannels));
  torch::NoGradGuard ng;
  conv->bias.zero_();
}

torch::Tensor NoisePredictorImpl::mixed(const torch::Tensor& latents) {
  VDIT_REQUIRE(latents.dim() == 4 && latents.size(1) == kLatentChannels, ErrorKind::ShapeMismatch,
               "latents", "expected [T, 4, h, w]");
  auto f_n = conv(latents);
  return torch::einsum("tchw,cd->tdhw", {f_n, w_n});
}

torch::Tensor NoisePredictorImpl::forward(const torch::Tensor& latents) {
  return normalize_per_frame(mixed(latents));
}

torch::Tensor gaussian_noise_baseline(at::IntArrayRef shape, std::uint64_t seed, torch::Dtype dtype) {
  auto gen = at::detail::createCPUGenerator(seed);
  return torch::randn(shape, gen, torch::TensorOptions().dtype(dtype));
}

torch::Tensor blend(const torch::Tensor& latents, const torch::Tensor& noise, double data_coef,
                    double noise_coef) {
  VDIT_REQUIRE(latents.sizes() == noise.sizes(), ErrorKind::ShapeMismatch, "latents/noise",
               "latents and noise must have equal shapes");
  return latents * data_coef + noise * noise_coef;
}

torch::Tensor blend(const torch::Tensor& latents, const torch::Tensor& noise, const NoiseSchedule& schedule,
                    const ScheduleConfig& cfg) {
  const auto [a, b] = schedule.blend_coefficients(cfg.step, cfg.convention);
  return blend(latents, noise, a, b);
}

}  // namespace vdit
