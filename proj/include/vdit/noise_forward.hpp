// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string_view>
#include <vector>

namespace vdit {

inline constexpr double kNoiseEpsilon = 1e-5;

enum class BlendConvention { Literal, Sqrt };
enum class NoiseKind { Predicted, Gaussian };

std::string_view to_string(BlendConvention c);
std::string_view to_string(NoiseKind k);
BlendConvention parse_convention(std::string_view s);
NoiseKind parse_noise_kind(std::string_view s);

struct ScheduleConfig {
  int num_steps = 1000;
  double beta_start = 8.5e-4;
  double beta_end = 1.2e-2;
  int step = 0;
  BlendConvention convention = BlendConvention::Literal;
};

/// Linear-beta diffusion schedule. alpha(step) is the cumulative product
/// prod_{i<=step} (1 - beta_i), so alpha(0) = 1 - beta_0 and alpha strictly
/// decreases with step.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(const ScheduleConfig& cfg = {});

  int num_steps() const { return static_cast<int>(alpha_bar_.size()); }
  double beta(int step) const;
  double alpha(int step) const;

  /// (data coefficient, noise coefficient) for a step:
  /// literal -> (alpha, 1 - alpha); sqrt -> (sqrt(alpha), sqrt(1 - alpha)).
  std::pair<double, double> blend_coefficients(int step, BlendConvention convention) const;

 private:
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
};

/// (x - mean) / (std + eps), statistics per frame over channels and space.
/// x is [T, C, h, w]; std is the population standard deviation.
torch::Tensor normalize_per_frame(const torch::Tensor& x, double eps = kNoiseEpsilon);

/// Video-specific noise: one 3x3 conv, a 4x4 channel mix W_N, then per-frame
/// normalization.
class NoisePredictorImpl : public torch::nn::Module {
 public:
  NoisePredictorImpl();
  /// latents [T, 4, h, w] -> noise [T, 4, h, w]
  torch::Tensor forward(const torch::Tensor& latents);
  /// conv + channel mix, before normalization
  torch::Tensor mixed(const torch::Tensor& latents);

  torch::nn::Conv2d conv{nullptr};
  torch::Tensor w_n;  // [4, 4], out[c'] = sum_c f[c] * w_n[c][c']
};
TORCH_MODULE(NoisePredictor);

/// I.i.d. standard normal field, reproducible from seed.
torch::Tensor gaussian_noise_baseline(at::IntArrayRef shape, std::uint64_t seed,
                                      torch::Dtype dtype = torch::kFloat32);

/// data_coef * latents + noise_coef * noise
torch::Tensor blend(const torch::Tensor& latents, const torch::Tensor& noise, double data_coef,
                    double noise_coef);
/// Blend at cfg.step with cfg.convention; rejects steps outside the schedule.
torch::Tensor blend(const torch::Tensor& latents, const torch::Tensor& noise, const NoiseSchedule& schedule,
                    const ScheduleConfig& cfg);

}  // namespace vdit
