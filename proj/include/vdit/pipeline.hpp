// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vdit/condition_encoder.hpp"
#include "vdit/latent_codec.hpp"
#include "vdit/mask_head.hpp"
#include "vdit/noise_forward.hpp"
#include "vdit/synth_data.hpp"
#include "vdit/video_unet.hpp"

namespace vdit {

struct ModelConfig {
  CodecConfig codec;
  EncoderConfig encoder;
  UNetConfig unet;
  MaskHeadConfig head;
};

/// The generative side: codec, both text encoders, frame tokenizer, the
/// denoising U-Net, and two pretraining-only heads (image-token projection
/// used as an implicit caption, and a token classifier on the word encoder).
/// Frozen for segmentation training.
class GenerativeStackImpl : public torch::nn::Module {
 public:
  GenerativeStackImpl(const ModelConfig& cfg, int vocab_size);

  void freeze();

  LatentCodec codec{nullptr};
  TextEncoder prompt_encoder{nullptr};
  TextEncoder word_encoder{nullptr};
  FrameTokenizer tokenizer{nullptr};
  VideoUNet unet{nullptr};
  torch::nn::Linear image_proj{nullptr};
  torch::nn::Linear word_head{nullptr};
};
TORCH_MODULE(GenerativeStack);

/// Trainable segmentation parts: prompt construction, noise prediction, and
/// the mask head.
class SegmenterImpl : public torch::nn::Module {
 public:
  explicit SegmenterImpl(const ModelConfig& cfg);

  PromptBuilder prompt{nullptr};
  NoisePredictor noise{nullptr};
  MaskHead head{nullptr};
};
TORCH_MODULE(Segmenter);

/// FNV-1a over the raw bytes of every parameter and buffer, in registration
/// order.
std::uint64_t parameter_checksum(const torch::nn::Module& module);

/// Frozen-encoder outputs for one clip; computed once and reused.
struct SampleFeatures {
  torch::Tensor latents;       // [T, 4, h, w]
  torch::Tensor feat4x;        // [T, C4, H/4, W/4]
  torch::Tensor prompt_embed;  // p_e [L, C]
  torch::Tensor word_features; // F_e [L, C]
  torch::Tensor image_tokens;  // p_v [T, N_p, C]
};

SampleFeatures encode_sample(GenerativeStack& stack, const Vocabulary& vocab, const torch::Tensor& frames,
                             const std::string& expression);
std::vector<SampleFeatures> encode_samples(GenerativeStack& stack, const Vocabulary& vocab,
                                           const std::vector<RenderedSample>& samples);

struct ForwardConfig {
  CondMode mode = CondMode::IT;
  Fusion fusion = Fusion::Attention;
  NoiseKind noise = NoiseKind::Predicted;
  ScheduleConfig schedule;
};

struct SegmentOutput {
  Predictions predictions;
  FeaturePyramid pyramid;
};

/// Prompt -> noise -> blend -> frozen U-Net taps -> pyramid -> mask head.
/// `gaussian` is used only for NoiseKind::Gaussian.
SegmentOutput segment(GenerativeStack& stack, Segmenter& seg, const SampleFeatures& f, const ForwardConfig& cfg,
                      const NoiseSchedule& schedule, const torch::Tensor& gaussian = {});

/// Deterministic 64-bit mix of a seed and a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Module checkpoints carry the producing config as a JSON string.
void save_checkpoint(torch::nn::Module& module, const std::string& config_json, const std::filesystem::path& file);
/// Loads parameters into `module`; returns the embedded config JSON.
std::string load_checkpoint(torch::nn::Module& module, const std::filesystem::path& file);

}  // namespace vdit
