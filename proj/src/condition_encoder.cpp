// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/condition_encoder.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vdit/error.hpp"
#include "vdit/nn_blocks.hpp"
#include "vdit/synth_data.hpp"

namespace vdit {

Vocabulary Vocabulary::builtin() {
  Vocabulary v;
  std::int64_t next = 0;
  auto add = [&](std::string_view w) { v.ids_.emplace(std::string(w), next++); };
  add("the");
  add("moving");
  for (auto c : kColorNames) add(c);
  for (auto s : kShapeNames) add(s);
  for (auto m : kMotionWords) add(m);
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  VDIT_REQUIRE(in.good(), ErrorKind::MissingFile, file.string(), "cannot open vocabulary file");
  const auto doc = nlohmann::json::parse(in);
  Vocabulary v;
  for (const auto& [token, id] : doc.items()) v.ids_.emplace(token, id.get<std::int64_t>());
  return v;
}

void Vocabulary::save(const std::filesystem::path& file) const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [token, id] : ids_) doc[token] = id;
  std::ofstream out(file);
  VDIT_REQUIRE(out.good(), ErrorKind::Io, file.string(), "cannot write vocabulary file");
  out << doc.dump(2) << "\n";
}

std::vector<std::int64_t> Vocabulary::tokenize(std::string_view expression) const {
  std::string lowered(expression);
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::istringstream words(lowered);
  std::vector<std::int64_t> ids;
  std::string unknown;
  for (std::string w; words >> w;) {
    auto it = ids_.find(w);
    if (it == ids_.end()) {
      unknown += unknown.empty() ? w : ", " + w;
      continue;
    }
    ids.push_back(it->second);
  }
  VDIT_REQUIRE(unknown.empty(), ErrorKind::OutOfVocabulary, unknown, "tokens not in vocabulary");
  VDIT_REQUIRE(!ids.empty(), ErrorKind::InvalidArgument, std::string(expression), "empty expression");
  return ids;
}

namespace {

torch::nn::ModuleList make_blocks(const EncoderConfig& cfg) {
  torch::nn::ModuleList list;
  for (int i = 0; i < cfg.depth; ++i) list->push_back(TransformerBlock(cfg.width, cfg.heads));
  return list;
}

}  // namespace

TextEncoderImpl::TextEncoderImpl(int vocab_size, EncoderConfig cfg) : cfg_(cfg) {
  embed = register_module("embed", torch::nn::Embedding(vocab_size, cfg.width));
  positions = register_parameter("positions", torch::randn({cfg.max_tokens, cfg.width}) * 0.02);
  blocks = register_module("blocks", make_blocks(cfg));
  norm = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.width})));
}

torch::Tensor TextEncoderImpl::forward_to_depth(const torch::Tensor& ids, int depth) {
  VDIT_REQUIRE(ids.dim() == 1 && ids.size(0) >= 1, ErrorKind::InvalidArgument, "ids",
               "expected a non-empty [L] token id tensor");
  const auto L = ids.size(0);
  VDIT_REQUIRE(L <= cfg_.max_tokens, ErrorKind::InvalidArgument, std::to_string(L),
               "expression longer than max_tokens");
  auto x = (embed(ids) + positions.slice(0, 0, L)).unsqueeze(0);
  for (int i = 0; i < depth && i < static_cast<int>(blocks->size()); ++i)
    x = blocks[static_cast<std::size_t>(i)]->as<TransformerBlock>()->forward(x);
  if (depth == 0) return x.squeeze(0);
  return norm(x).squeeze(0);
}

FrameTokenizerImpl::FrameTokenizerImpl(EncoderConfig cfg) : cfg_(cfg) {
  patch = register_module(
      "patch", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, cfg.width, cfg.patch).stride(cfg.patch)));
  positions = register_parameter("positions", torch::randn({cfg.max_patches, cfg.width}) * 0.02);
  blocks = register_module("blocks", make_blocks(cfg));
  norm = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.width})));
}

torch::Tensor FrameTokenizerImpl::forward(const torch::Tensor& frames) {
  VDIT_REQUIRE(frames.dim() == 4 && frames.size(1) == 3, ErrorKind::ShapeMismatch, "frames",
               "expected [T, 3, H, W]");
  VDIT_REQUIRE(frames.size(2) % cfg_.patch == 0 && frames.size(3) % cfg_.patch == 0,
               ErrorKind::InvalidArgument,
               std::to_string(frames.size(2)) + "x" + std::to_string(frames.size(3)),
               "resolution must be divisible by the patch size");
  auto x = patch(frames * 2.0 - 1.0).flatten(2).transpose(1, 2);  // [T, N_p, C]
  const auto n = x.size(1);
  VDIT_REQUIRE(n <= cfg_.max_patches, ErrorKind::InvalidArgument, std::to_string(n),
               "too many patches for the positional table");
  x = x + positions.slice(0, 0, n).unsqueeze(0);
  for (auto& b : *blocks) x = b->as<TransformerBlock>()->forward(x);
  return norm(x);
}

TextTokens encode_text(const Vocabulary& vocab, std::string_view expression, TextEncoder& prompt_encoder,
                       TextEncoder& word_encoder) {
  TextTokens t;
  t.token_ids = vocab.tokenize(expression);
  auto ids = torch::tensor(t.token_ids, torch::kInt64);
  t.prompt_embedding = prompt_encoder->forward(ids);
  t.word_features = word_encoder->forward(ids);
  return t;
}

std::string_view to_string(CondMode m) {
  switch (m) {
    case CondMode::IT: return "IT";
    case CondMode::I: return "I";
    case CondMode::T: return "T";
  }
  return "?";
}

std::string_view to_string(Fusion f) { return f == Fusion::Attention ? "attention" : "concat"; }

CondMode parse_cond_mode(std::string_view s) {
  if (s == "IT") return CondMode::IT;
  if (s == "I") return CondMode::I;
  if (s == "T") return CondMode::T;
  throw Error(ErrorKind::InvalidArgument, std::string(s), "unknown conditioning mode");
}

Fusion parse_fusion(std::string_view s) {
  if (s == "attention") return Fusion::Attention;
  if (s == "concat") return Fusion::Concat;
  throw Error(ErrorKind::InvalidArgument, std::string(s), "unknown fusion");
}

PromptMlpImpl::PromptMlpImpl(int width) {
  fc1 = register_module("fc1", torch::nn::Linear(width, 4 * width));
  fc2 = register_module("fc2", torch::nn::Linear(4 * width, width));
  torch::NoGradGuard ng;
  fc2->weight.zero_();
  fc2->bias.zero_();
}

TextGuidedProjectionImpl::TextGuidedProjectionImpl(int width_) : width(width_) {
  auto lin = [&] { return torch::nn::Linear(torch::nn::LinearOptions(width, width).bias(false)); };
  w_q = register_module("w_q", lin());
  w_k = register_module("w_k", lin());
  w_v = register_module("w_v", lin());
  mlp = register_module("mlp", PromptMlp(width));
  torch::NoGradGuard ng;
  w_v->weight.mul_(0.1);
}

namespace {

void check_tokens(const torch::Tensor& p_e, const torch::Tensor& p_v, int width) {
  VDIT_REQUIRE(p_e.dim() == 2 && p_v.dim() == 3, ErrorKind::ShapeMismatch, "p_e/p_v",
               "expected p_e [L, C] and p_v [T, N_p, C]");
  VDIT_REQUIRE(p_e.size(1) == width && p_v.size(2) == width, ErrorKind::ShapeMismatch,
               std::to_string(p_e.size(1)) + " vs " + std::to_string(p_v.size(2)),
               "text and image tokens must share the channel width");
}

}  // namespace

torch::Tensor TextGuidedProjectionImpl::attention(const torch::Tensor& p_e, const torch::Tensor& p_v) {
  check_tokens(p_e, p_v, width);
  auto q = w_q(p_e).unsqueeze(0);  // [1, L, C]
  auto k = w_k(p_v);               // [T, N, C]
  auto logits = torch::matmul(q, k.transpose(1, 2)) / std::sqrt(static_cast<double>(width));
  return torch::softmax(logits, -1);
}

torch::Tensor TextGuidedProjectionImpl::forward(const torch::Tensor& p_e, const torch::Tensor& p_v) {
  auto weights = attention(p_e, p_v);          // [T, L, N]
  auto attended = torch::matmul(weights, w_v(p_v));  // [T, L, C]
  return mlp(p_e.unsqueeze(0) + attended);
}

ConcatFusionImpl::ConcatFusionImpl(int width) {
  VDIT_REQUIRE(width % 2 == 0, ErrorKind::InvalidArgument, std::to_string(width),
               "concat fusion needs an even width to match the attention parameter count");
  // 11C^2 + 5C parameters, the same as the attention projection.
  const int hidden = (11 * width + 4) / 2;
  fc1 = register_module("fc1", torch::nn::Linear(torch::nn::LinearOptions(width, hidden).bias(false)));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, width));
}

torch::Tensor ConcatFusionImpl::forward(const torch::Tensor& p_e, const torch::Tensor& p_v) {
  check_tokens(p_e, p_v, static_cast<int>(fc1->weight.size(1)));
  auto text = p_e.unsqueeze(0).expand({p_v.size(0), p_e.size(0), p_e.size(1)});
  auto joined = torch::cat({text, p_v}, 1);
  return fc2(torch::gelu(fc1(joined)));
}

int64_t parameter_count(torch::nn::Module& m) {
  int64_t n = 0;
  for (const auto& p : m.parameters()) n += p.numel();
  return n;
}

PromptBuilderImpl::PromptBuilderImpl(int width) {
  projection = register_module("projection", TextGuidedProjection(width));
  concat = register_module("concat", ConcatFusion(width));
  image_projection = register_module("image_projection", torch::nn::Linear(width, width));
}

PromptTokens PromptBuilderImpl::forward(const torch::Tensor& p_e, const torch::Tensor& p_v, CondMode mode,
                                        Fusion fusion) {
  PromptTokens out;
  out.mode = mode;
  switch (mode) {
    case CondMode::T:
      out.tokens = p_e.unsqueeze(0).expand({p_v.size(0), p_e.size(0), p_e.size(1)}).contiguous();
      break;
    case CondMode::I:
      out.tokens = image_projection(p_v);
      break;
    case CondMode::IT:
      out.tokens = fusion == Fusion::Attention ? projection(p_e, p_v) : concat(p_e, p_v);
      break;
  }
  return out;
}

}  // namespace vdit
