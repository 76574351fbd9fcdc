// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/condition_encoder.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>

#include "vdit/error.hpp"

namespace vdit {
namespace {

void set_identity(torch::nn::Linear& l) {
  torch::NoGradGuard ng;
  l->weight.copy_(torch::eye(l->weight.size(0)));
}

TEST(Projection, HandComputedTwoByThree) {
  const auto start = std::chrono::steady_clock::now();
  TextGuidedProjection proj(2);
  set_identity(proj->w_q);
  set_identity(proj->w_k);
  set_identity(proj->w_v);
  auto p_e = torch::tensor({1.f, 0.f, 0.f, 1.f}).view({2, 2});
  auto p_v = torch::tensor({1.f, 0.f, 0.f, 1.f, 1.f, 1.f}).view({1, 3, 2});
  // logits = p_e p_v^T / sqrt(2); e = exp(1/sqrt 2): weights (e, 1, e) / (2e + 1)
  const double hi = 0.4011120926797859, lo = 0.1977758146404282;
  auto w = proj->attention(p_e, p_v);
  ASSERT_EQ(w.sizes(), (std::vector<int64_t>{1, 2, 3}));
  const double want_w[2][3] = {{hi, lo, hi}, {lo, hi, hi}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(w[0][i][j].item<double>(), want_w[i][j], 1e-6);
  // zero-initialized MLP output layer: identity block
  auto out = proj->forward(p_e, p_v);
  const double want[2][2] = {{1.802224185359572, 0.5988879073202141}, {0.5988879073202141, 1.802224185359572}};
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(out[0][i][c].item<double>(), want[i][c], 1e-6);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(Projection, RowsSumToOne) {
  torch::manual_seed(4);
  TextGuidedProjection proj(16);
  auto w = proj->attention(torch::randn({5, 16}) * 3, torch::randn({4, 9, 16}) * 3);
  EXPECT_LE((w.sum(-1) - 1).abs().max().item<double>(), 1e-6);
  EXPECT_GE(w.min().item<double>(), 0.0);
}

TEST(Projection, RejectsWidthMismatch) {
  TextGuidedProjection proj(8);
  try {
    proj->forward(torch::randn({3, 8}), torch::randn({2, 4, 6}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(Fusion, ConcatHasTheSameParameterCount) {
  for (int c : {2, 8, 64}) {
    TextGuidedProjection a(c);
    ConcatFusion b(c);
    EXPECT_EQ(parameter_count(*a), parameter_count(*b)) << c;
    EXPECT_EQ(parameter_count(*a), 11LL * c * c + 5LL * c);
  }
  EXPECT_THROW(ConcatFusion(7), Error);
}

TEST(Fusion, ConcatOutputLength) {
  ConcatFusion f(8);
  auto out = f->forward(torch::randn({3, 8}), torch::randn({2, 5, 8}));
  EXPECT_EQ(out.sizes(), (std::vector<int64_t>{2, 8, 8}));
}

TEST(PromptBuilder, ModesProduceExpectedShapes) {
  PromptBuilder pb(8);
  auto p_e = torch::randn({4, 8}), p_v = torch::randn({3, 6, 8});
  EXPECT_EQ(pb->forward(p_e, p_v, CondMode::IT).tokens.sizes(), (std::vector<int64_t>{3, 4, 8}));
  EXPECT_EQ(pb->forward(p_e, p_v, CondMode::IT, Fusion::Concat).tokens.sizes(), (std::vector<int64_t>{3, 10, 8}));
  EXPECT_EQ(pb->forward(p_e, p_v, CondMode::I).tokens.sizes(), (std::vector<int64_t>{3, 6, 8}));
  auto t = pb->forward(p_e, p_v, CondMode::T).tokens;
  EXPECT_EQ(t.sizes(), (std::vector<int64_t>{3, 4, 8}));
  EXPECT_TRUE(torch::equal(t[2], p_e));
}

TEST(Vocabulary, TokenizesCaseInsensitively) {
  const auto v = Vocabulary::builtin();
  const auto ids = v.tokenize("The RED circle moving left");
  ASSERT_EQ(ids.size(), 5u);
  EXPECT_EQ(ids[0], v.ids().at("the"));
  EXPECT_EQ(ids[1], v.ids().at("red"));
}

TEST(Vocabulary, ReportsEveryUnknownToken) {
  try {
    Vocabulary::builtin().tokenize("the purple hexagon moving left");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfVocabulary);
    EXPECT_EQ(e.subject(), "purple, hexagon");
  }
}

TEST(Vocabulary, ShippedFileMatchesBuiltin) {
  const auto file = std::filesystem::path(VDIT_DATA_DIR) / "vocab.json";
  ASSERT_TRUE(std::filesystem::exists(file)) << file;
  EXPECT_TRUE(Vocabulary::load(file) == Vocabulary::builtin());
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const auto file = std::filesystem::temp_directory_path() / "vdit_vocab_roundtrip.json";
  Vocabulary::builtin().save(file);
  EXPECT_TRUE(Vocabulary::load(file) == Vocabulary::builtin());
  std::filesystem::remove(file);
  EXPECT_THROW(Vocabulary::load(file), Error);
}

TEST(TextEncoder, ShapesAndLengthLimit) {
  const auto v = Vocabulary::builtin();
  EncoderConfig cfg;
  cfg.width = 16;
  cfg.max_tokens = 4;
  TextEncoder pe(v.size(), cfg), fe(v.size(), cfg);
  const auto t = encode_text(v, "red circle moving left", pe, fe);
  EXPECT_EQ(t.prompt_embedding.sizes(), (std::vector<int64_t>{4, 16}));
  EXPECT_EQ(t.word_features.sizes(), (std::vector<int64_t>{4, 16}));
  EXPECT_THROW(encode_text(v, "the red circle moving left", pe, fe), Error);
}

TEST(FrameTokenizer, PatchGrid) {
  EncoderConfig cfg;
  cfg.width = 16;
  FrameTokenizer tok(cfg);
  EXPECT_EQ(tok->forward(torch::rand({2, 3, 32, 48})).sizes(), (std::vector<int64_t>{2, 24, 16}));
  EXPECT_THROW(tok->forward(torch::rand({2, 3, 30, 48})), Error);
}

TEST(Modes, ParseAndPrint) {
  for (auto m : {CondMode::IT, CondMode::I, CondMode::T}) EXPECT_EQ(parse_cond_mode(to_string(m)), m);
  for (auto f : {Fusion::Attention, Fusion::Concat}) EXPECT_EQ(parse_fusion(to_string(f)), f);
  EXPECT_THROW(parse_cond_mode("TI"), Error);
}

}  // namespace
}  // namespace vdit
