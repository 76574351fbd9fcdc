// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <vector>

#include "vdit/config.hpp"
#include "vdit/eval_metrics.hpp"
#include "vdit/matching_losses.hpp"
#include "vdit/pipeline.hpp"

namespace vdit {

struct CodecReport {
  std::vector<double> loss;  // per step
  double psnr = 0;           // held-out frames, dB
  double latent_scale = 1;
};

/// L2 reconstruction training, then sets the latent scale so encoded
/// training latents have unit standard deviation.
CodecReport pretrain_codec(LatentCodec& codec, const std::vector<RenderedSample>& train,
                           const std::vector<RenderedSample>& held_out, const CodecPretrainConfig& cfg,
                           std::uint64_t seed);

/// Mean PSNR of decode(encode(x)) over every frame of the given clips.
double reconstruction_psnr(LatentCodec& codec, const std::vector<RenderedSample>& clips);

struct GeneratorReport {
  std::vector<double> loss;   // per step, noise regression term
  double val_loss_start = 0;  // fixed validation batch
  double val_loss_end = 0;
  double val_drop() const { return val_loss_start > 0 ? 1.0 - val_loss_end / val_loss_start : 0.0; }
};

/// Fixed-batch validation loss of the noise regression objective.
double generator_validation_loss(GenerativeStack& stack, const Vocabulary& vocab,
                                 const std::vector<RenderedSample>& val, const NoiseSchedule& schedule,
                                 std::uint64_t seed);

/// Noise-prediction training of the U-Net and encoders on caption (or
/// projected image-token) conditioning with the standard sqrt forward
/// process at uniformly drawn steps. The codec must already be trained.
GeneratorReport pretrain_generator(GenerativeStack& stack, const Vocabulary& vocab,
                                   const std::vector<RenderedSample>& train, const std::vector<RenderedSample>& val,
                                   const T2VPretrainConfig& cfg, const NoiseSchedule& schedule, std::uint64_t seed);

/// Builds a segmenter from the config seed; the image-only projection starts
/// from the stack's pretraining projection.
Segmenter make_segmenter(const ExperimentConfig& cfg, GenerativeStack& stack);

/// Gaussian field for a given stream of an experiment.
torch::Tensor experiment_noise(const ExperimentConfig& cfg, const SampleFeatures& f, std::uint64_t stream);

struct TrainReport {
  std::vector<std::vector<double>> rows;  // step, lr, then LossBreakdown::values()
  std::vector<std::pair<int, double>> snapshots;  // (step, J&F)
  std::uint64_t frozen_checksum_before = 0;
  std::uint64_t frozen_checksum_after = 0;
  static std::vector<std::string> column_names();
};

using SnapshotFn = std::function<double(int step)>;

/// Segmentation training of the trainable parts only. Throws FrozenViolation
/// if the generative stack changes and Divergence on a non-finite loss.
TrainReport train_segmenter(GenerativeStack& stack, Segmenter& seg, const std::vector<SampleFeatures>& features,
                            const std::vector<VideoTarget>& targets, const ExperimentConfig& cfg,
                            const SnapshotFn& snapshot = {});

std::vector<VideoTarget> make_targets(const std::vector<RenderedSample>& samples);

/// [H, W] tensor (any dtype, nonzero = foreground) to a Mask.
Mask to_mask(const torch::Tensor& m);

struct VideoPrediction {
  torch::Tensor masks;   // [T, H, W] uint8
  int64_t query = 0;     // selected instance
  torch::Tensor scores;  // [T] sigmoid score of the selected query
  FeaturePyramid pyramid;
};

VideoPrediction predict_video(GenerativeStack& stack, Segmenter& seg, const SampleFeatures& f,
                              const ExperimentConfig& cfg, std::uint64_t stream);

struct VideoResult {
  std::vector<int> frames;  // indices of the valid frames
  std::vector<double> iou;
  std::vector<double> f;
  int64_t query = 0;
};

struct EvalResult {
  std::vector<VideoResult> videos;
  JfSummary jf;
  MapResult map;
  double iou_diff1 = 0;  // x100
  double iou_diff5 = 0;  // x100
  double hq = 0;
  std::vector<double> roi_decay;  // offsets 1 .. T-1
};

/// Evaluates the first `max_videos` clips (all when negative).
EvalResult evaluate(GenerativeStack& stack, Segmenter& seg, const std::vector<RenderedSample>& samples,
                    const std::vector<SampleFeatures>& features, const ExperimentConfig& cfg, int max_videos = -1);

}  // namespace vdit
