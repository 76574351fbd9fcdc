// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "vdit/config.hpp"
#include "vdit/error.hpp"
#include "vdit/latent_codec.hpp"
#include "vdit/pipeline.hpp"
#include "vdit/synth_data.hpp"
#include "vdit/training.hpp"
#include "vdit/video_unet.hpp"

namespace vdit {
namespace {

using Sizes = std::vector<int64_t>;

TEST(Codec, ShapesAndRange) {
  torch::manual_seed(0);
  LatentCodec codec;
  auto x = torch::rand({3, 3, 64, 96});
  auto c = codec->encode(x);
  EXPECT_EQ(c.latents.sizes(), (Sizes{3, 4, 8, 12}));
  EXPECT_EQ(c.feat4x.sizes(), (Sizes{3, 32, 16, 24}));
  auto y = codec->decode(c.latents);
  EXPECT_EQ(y.sizes(), x.sizes());
  EXPECT_GE(y.min().item<float>(), 0.f);
  EXPECT_LE(y.max().item<float>(), 1.f);
  EXPECT_THROW(codec->encode(torch::rand({1, 3, 60, 64})), Error);
}

TEST(Codec, FramesNeverMix) {
  torch::manual_seed(1);
  LatentCodec codec;
  codec->eval();
  auto x = torch::rand({2, 3, 32, 32});
  auto a = codec->encode(x).latents;
  x[1].uniform_();
  auto b = codec->encode(x).latents;
  EXPECT_TRUE(torch::equal(a[0], b[0]));
}

TEST(Codec, Psnr) {
  auto a = torch::zeros({1, 3, 4, 4}), b = torch::full({1, 3, 4, 4}, 0.1f);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-4);  // MSE 0.01
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(UNet, TapShapes) {
  torch::manual_seed(2);
  VideoUNet unet;
  auto z = torch::randn({3, 4, 8, 8});
  auto ctx = torch::randn({3, 5, 64});
  auto out = unet->forward(z, ctx, 10);
  EXPECT_EQ(out.noise_prediction.sizes(), z.sizes());
  EXPECT_EQ(out.taps[0].sizes(), (Sizes{3, 32, 8, 8}));
  EXPECT_EQ(out.taps[1].sizes(), (Sizes{3, 64, 4, 4}));
  EXPECT_EQ(out.taps[2].sizes(), (Sizes{3, 96, 2, 2}));
  auto taps = unet->extract_features(z, ctx, 10);
  EXPECT_TRUE(torch::allclose(taps[2], out.taps[2]));
  EXPECT_THROW(unet->forward(z, torch::randn({2, 5, 64}), 10), Error);
}

TEST(UNet, TemporalAttentionMixesFrames) {
  torch::manual_seed(3);
  UNetConfig cfg;
  VideoUNet with(cfg);
  cfg.temporal_attention = false;
  VideoUNet without(cfg);
  {
    // the attention output starts at zero; give it weights so frames interact
    torch::NoGradGuard ng;
    for (auto& t : {with, without})
      for (auto& p : t->named_parameters())
        if (p.key().find("to_out") != std::string::npos) p.value().normal_(0, 0.2);
  }
  auto z = torch::randn({2, 4, 8, 8});
  auto ctx = torch::randn({2, 3, 64});
  auto a1 = with->extract_features(z, ctx, 0), b1 = without->extract_features(z, ctx, 0);
  auto z2 = z.clone();
  z2[1].normal_();
  auto a2 = with->extract_features(z2, ctx, 0), b2 = without->extract_features(z2, ctx, 0);
  EXPECT_FALSE(torch::allclose(a1[0][0], a2[0][0]));
  EXPECT_TRUE(torch::allclose(b1[0][0], b2[0][0]));
}

TEST(Pyramid, OrdersFineToCoarse) {
  std::array<torch::Tensor, 3> side{torch::zeros({2, 32, 8, 8}), torch::zeros({2, 64, 4, 4}),
                                    torch::zeros({2, 96, 2, 2})};
  auto p = assemble_pyramid(side, torch::zeros({2, 32, 16, 16}));
  EXPECT_EQ(p.levels[0].size(2), 16);
  EXPECT_EQ(p.levels[3].size(1), 96);
  EXPECT_EQ(p.frames(), 2);
  EXPECT_THROW(assemble_pyramid(side, torch::zeros({2, 32, 12, 12})), Error);
}

TEST(Stack, FreezeAndChecksum) {
  torch::manual_seed(4);
  GenerativeStack stack(ModelConfig{}, Vocabulary::builtin().size());
  const auto before = parameter_checksum(*stack);
  EXPECT_EQ(parameter_checksum(*stack), before);
  stack->freeze();
  for (const auto& p : stack->parameters()) ASSERT_FALSE(p.requires_grad());
  {
    torch::NoGradGuard ng;
    stack->unet->parameters()[0].view({-1})[0] += 1e-3;
  }
  EXPECT_NE(parameter_checksum(*stack), before);
}

TEST(Stack, CheckpointRoundTrip) {
  const auto file = std::filesystem::temp_directory_path() / "vdit_checkpoint_test.pt";
  torch::manual_seed(5);
  Segmenter a(ModelConfig{});
  save_checkpoint(*a, R"({"k": 1})", file);
  torch::manual_seed(6);
  Segmenter b(ModelConfig{});
  EXPECT_NE(parameter_checksum(*a), parameter_checksum(*b));
  EXPECT_EQ(load_checkpoint(*b, file), R"({"k": 1})");
  EXPECT_EQ(parameter_checksum(*a), parameter_checksum(*b));
  std::filesystem::remove(file);
  EXPECT_THROW(load_checkpoint(*b, file), Error);
}

TEST(Seeds, MixIsDeterministicAndSpreads) {
  EXPECT_EQ(mix_seed(3, 1), mix_seed(3, 1));
  EXPECT_NE(mix_seed(3, 1), mix_seed(3, 2));
  EXPECT_NE(mix_seed(3, 1), mix_seed(4, 1));
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg.data.train_videos = 2;
    cfg.data.eval_videos = 1;
    cfg.data.frame_count = 3;
    torch::manual_seed(7);
    stack = GenerativeStack(cfg.model, vocab.size());
    stack->freeze();
    samples = make_dataset(cfg.data, Split::Train);
    features = encode_samples(stack, vocab, samples);
  }
  ExperimentConfig cfg;
  Vocabulary vocab = Vocabulary::builtin();
  GenerativeStack stack{nullptr};
  std::vector<RenderedSample> samples;
  std::vector<SampleFeatures> features;
};

TEST_F(PipelineTest, SegmentShapesForEveryVariant) {
  auto seg = make_segmenter(cfg, stack);
  NoiseSchedule schedule;
  const auto& f = features[0];
  EXPECT_EQ(f.latents.sizes(), (Sizes{3, 4, 8, 8}));
  for (auto mode : {CondMode::IT, CondMode::I, CondMode::T})
    for (auto noise : {NoiseKind::Predicted, NoiseKind::Gaussian}) {
      ForwardConfig fc;
      fc.mode = mode;
      fc.noise = noise;
      auto run_cfg = cfg;
      run_cfg.forward = fc;
      auto out = segment(stack, seg, f, fc, schedule, experiment_noise(run_cfg, f, 1));
      ASSERT_EQ(out.predictions.masks.sizes(), (Sizes{3, 5, 64, 64}));
      ASSERT_EQ(out.predictions.masks_lowres.sizes(), (Sizes{3, 5, 8, 8}));
      ASSERT_EQ(out.pyramid.levels[1].sizes(), (Sizes{3, 32, 8, 8}));
    }
  ForwardConfig fc;
  fc.noise = NoiseKind::Gaussian;
  EXPECT_THROW(segment(stack, seg, f, fc, schedule), Error);
}

TEST_F(PipelineTest, TrainingLeavesTheStackUntouched) {
  cfg.optim.steps = 3;
  auto seg = make_segmenter(cfg, stack);
  const auto seg_before = parameter_checksum(*seg);
  auto report = train_segmenter(stack, seg, features, make_targets(samples), cfg);
  EXPECT_EQ(report.frozen_checksum_before, report.frozen_checksum_after);
  EXPECT_EQ(report.frozen_checksum_after, parameter_checksum(*stack));
  EXPECT_NE(parameter_checksum(*seg), seg_before);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].size(), TrainReport::column_names().size());
}

TEST_F(PipelineTest, TrainingIsReproducible) {
  cfg.optim.steps = 2;
  auto run = [&] {
    auto seg = make_segmenter(cfg, stack);
    train_segmenter(stack, seg, features, make_targets(samples), cfg);
    return parameter_checksum(*seg);
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace vdit
