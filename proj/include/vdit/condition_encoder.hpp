// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vdit {

/// Closed-grammar whitespace tokenizer.
class Vocabulary {
 public:
  static Vocabulary builtin();
  static Vocabulary load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  /// Lower-cases and splits on whitespace; throws OutOfVocabulary listing
  /// every unknown token.
  std::vector<std::int64_t> tokenize(std::string_view expression) const;
  int size() const { return static_cast<int>(ids_.size()); }
  const std::map<std::string, std::int64_t>& ids() const { return ids_; }

  bool operator==(const Vocabulary&) const = default;

 private:
  std::map<std::string, std::int64_t> ids_;
};

struct EncoderConfig {
  int width = 64;  // C, shared by text and image tokens
  int heads = 2;
  int depth = 2;
  int max_tokens = 16;
  int patch = 8;  // rho
  int max_patches = 256;
};

/// Token embedding + learned positions + self-attention blocks.
class TextEncoderImpl : public torch::nn::Module {
 public:
  TextEncoderImpl(int vocab_size, EncoderConfig cfg);
  /// ids [L] -> [L, C]
  torch::Tensor forward(const torch::Tensor& ids) { return forward_to_depth(ids, cfg_.depth); }
  /// Output after the first `depth` attention blocks (0 = embeddings only).
  torch::Tensor forward_to_depth(const torch::Tensor& ids, int depth);

 private:
  EncoderConfig cfg_;
  torch::nn::Embedding embed{nullptr};
  torch::Tensor positions;
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::LayerNorm norm{nullptr};
};
TORCH_MODULE(TextEncoder);

/// Patch embedding (stride rho) + learned positions + self-attention blocks,
/// applied to each frame independently.
class FrameTokenizerImpl : public torch::nn::Module {
 public:
  explicit FrameTokenizerImpl(EncoderConfig cfg);
  /// frames [T, 3, H, W] -> [T, N_p, C]
  torch::Tensor forward(const torch::Tensor& frames);

 private:
  EncoderConfig cfg_;
  torch::nn::Conv2d patch{nullptr};
  torch::Tensor positions;
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::LayerNorm norm{nullptr};
};
TORCH_MODULE(FrameTokenizer);

struct TextTokens {
  torch::Tensor prompt_embedding;  // p_e [L, C]
  torch::Tensor word_features;     // F_e [L, C]
  std::vector<std::int64_t> token_ids;
};

/// Tokenizes and runs both (independent) text encoders.
TextTokens encode_text(const Vocabulary& vocab, std::string_view expression, TextEncoder& prompt_encoder,
                       TextEncoder& word_encoder);

enum class CondMode { IT, I, T };
enum class Fusion { Attention, Concat };
std::string_view to_string(CondMode m);
std::string_view to_string(Fusion f);
CondMode parse_cond_mode(std::string_view s);
Fusion parse_fusion(std::string_view s);

/// Residual two-layer MLP, hidden 4C; the output layer starts at zero so the
/// block is the identity at initialization.
class PromptMlpImpl : public torch::nn::Module {
 public:
  explicit PromptMlpImpl(int width);
  torch::Tensor forward(const torch::Tensor& x) { return x + fc2(torch::gelu(fc1(x))); }

  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(PromptMlp);

/// Text tokens attend to one frame's image tokens:
///   MLP(p_e + softmax(p_e Wq (p_v Wk)^T / sqrt(C)) p_v Wv)
class TextGuidedProjectionImpl : public torch::nn::Module {
 public:
  explicit TextGuidedProjectionImpl(int width);

  /// p_e [L, C], p_v [T, N_p, C] -> [T, L, C]
  torch::Tensor forward(const torch::Tensor& p_e, const torch::Tensor& p_v);
  /// Attention weights [T, L, N_p].
  torch::Tensor attention(const torch::Tensor& p_e, const torch::Tensor& p_v);

  torch::nn::Linear w_q{nullptr}, w_k{nullptr}, w_v{nullptr};
  PromptMlp mlp{nullptr};
  int width;
};
TORCH_MODULE(TextGuidedProjection);

/// Concatenation baseline: [p_e ; p_v] followed by an MLP whose parameter
/// count equals TextGuidedProjection's (C must be even).
class ConcatFusionImpl : public torch::nn::Module {
 public:
  explicit ConcatFusionImpl(int width);
  /// -> [T, L + N_p, C]
  torch::Tensor forward(const torch::Tensor& p_e, const torch::Tensor& p_v);

  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(ConcatFusion);

int64_t parameter_count(torch::nn::Module& m);

struct PromptTokens {
  torch::Tensor tokens;  // p_ve [T, L', C]
  CondMode mode = CondMode::IT;
};

/// Trainable conditioning path: text-guided projection, concat baseline, and
/// the image-only per-token projection.
class PromptBuilderImpl : public torch::nn::Module {
 public:
  explicit PromptBuilderImpl(int width);

  PromptTokens forward(const torch::Tensor& p_e, const torch::Tensor& p_v, CondMode mode,
                       Fusion fusion = Fusion::Attention);

  TextGuidedProjection projection{nullptr};
  ConcatFusion concat{nullptr};
  torch::nn::Linear image_projection{nullptr};
};
TORCH_MODULE(PromptBuilder);

}  // namespace vdit
