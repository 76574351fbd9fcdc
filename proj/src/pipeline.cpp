// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/pipeline.hpp"

#include "vdit/error.hpp"

namespace vdit {

GenerativeStackImpl::GenerativeStackImpl(const ModelConfig& cfg, int vocab_size) {
  const int c = cfg.encoder.width;
  VDIT_REQUIRE(cfg.unet.context_dim == c, ErrorKind::InvalidArgument, "unet.context_dim",
               "U-Net cross-attention width must equal the encoder width");
  codec = register_module("codec", LatentCodec(cfg.codec));
  prompt_encoder = register_module("prompt_encoder", TextEncoder(vocab_size, cfg.encoder));
  word_encoder = register_module("word_encoder", TextEncoder(vocab_size, cfg.encoder));
  tokenizer = register_module("tokenizer", FrameTokenizer(cfg.encoder));
  unet = register_module("unet", VideoUNet(cfg.unet));
  image_proj = register_module("image_proj", torch::nn::Linear(c, c));
  word_head = register_module("word_head", torch::nn::Linear(c, vocab_size));
}

void GenerativeStackImpl::freeze() {
  for (auto& p : parameters()) p.set_requires_grad(false);
  eval();
}

SegmenterImpl::SegmenterImpl(const ModelConfig& cfg) {
  VDIT_REQUIRE(cfg.head.text_dim == cfg.encoder.width, ErrorKind::InvalidArgument, "head.text_dim",
               "mask head text width must equal the encoder width");
  auto head_cfg = cfg.head;
  head_cfg.level_channels = {cfg.codec.tap_channels, cfg.unet.level_channels[0], cfg.unet.level_channels[1],
                             cfg.unet.level_channels[2]};
  head_cfg.max_text_tokens = cfg.encoder.max_tokens;
  prompt = register_module("prompt", PromptBuilder(cfg.encoder.width));
  noise = register_module("noise", NoisePredictor());
  head = register_module("head", MaskHead(head_cfg));
}

std::uint64_t parameter_checksum(const torch::nn::Module& module) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const torch::Tensor& t) {
    auto c = t.detach().contiguous();
    const auto* bytes = static_cast<const unsigned char*>(c.data_ptr());
    const auto n = c.numel() * static_cast<int64_t>(c.element_size());
    for (int64_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : module.named_parameters(true)) feed(p.value());
  for (const auto& b : module.named_buffers(true)) feed(b.value());
  return h;
}

SampleFeatures encode_sample(GenerativeStack& stack, const Vocabulary& vocab, const torch::Tensor& frames,
                             const std::string& expression) {
  torch::NoGradGuard ng;
  SampleFeatures f;
  auto clip = stack->codec->encode(frames);
  f.latents = clip.latents;
  f.feat4x = clip.feat4x;
  auto text = encode_text(vocab, expression, stack->prompt_encoder, stack->word_encoder);
  f.prompt_embed = text.prompt_embedding;
  f.word_features = text.word_features;
  f.image_tokens = stack->tokenizer->forward(frames);
  return f;
}

std::vector<SampleFeatures> encode_samples(GenerativeStack& stack, const Vocabulary& vocab,
                                           const std::vector<RenderedSample>& samples) {
  std::vector<SampleFeatures> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode_sample(stack, vocab, s.frames, s.expression));
  return out;
}

SegmentOutput segment(GenerativeStack& stack, Segmenter& seg, const SampleFeatures& f, const ForwardConfig& cfg,
                      const NoiseSchedule& schedule, const torch::Tensor& gaussian) {
  auto prompts = seg->prompt->forward(f.prompt_embed, f.image_tokens, cfg.mode, cfg.fusion).tokens;
  torch::Tensor noise;
  if (cfg.noise == NoiseKind::Predicted) {
    noise = seg->noise->forward(f.latents);
  } else {
    VDIT_REQUIRE(gaussian.defined(), ErrorKind::InvalidArgument, "gaussian", "Gaussian noise field not supplied");
    noise = gaussian;
  }
  auto noisy = blend(f.latents, noise, schedule, cfg.schedule);
  auto taps = stack->unet->extract_features(noisy, prompts, cfg.schedule.step);
  SegmentOutput out;
  out.pyramid = assemble_pyramid(taps, f.feat4x);
  out.predictions = seg->head->forward(out.pyramid, f.word_features);
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void save_checkpoint(torch::nn::Module& module, const std::string& config_json, const std::filesystem::path& file) {
  torch::serialize::OutputArchive archive;
  module.save(archive);
  archive.write("config_json", c10::IValue(config_json));
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  archive.save_to(file.string());
}

std::string load_checkpoint(torch::nn::Module& module, const std::filesystem::path& file) {
  VDIT_REQUIRE(std::filesystem::exists(file), ErrorKind::MissingFile, file.string(), "checkpoint not found");
  torch::serialize::InputArchive archive;
  archive.load_from(file.string());
  module.load(archive);
  c10::IValue cfg;
  archive.read("config_json", cfg);
  return cfg.toStringRef();
}

}  // namespace vdit
