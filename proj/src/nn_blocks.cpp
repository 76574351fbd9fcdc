// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/nn_blocks.hpp"

#include <cmath>

#include "vdit/error.hpp"

namespace vdit {

AttentionResult scaled_dot_attention(const torch::Tensor& q, const torch::Tensor& k,
                                     const torch::Tensor& v) {
  VDIT_REQUIRE(q.size(-1) == k.size(-1), ErrorKind::ShapeMismatch, "q/k",
               "query and key channel dims differ");
  VDIT_REQUIRE(k.size(-2) == v.size(-2), ErrorKind::ShapeMismatch, "k/v",
               "key and value lengths differ");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.size(-1)));
  auto logits = torch::matmul(q, k.transpose(-2, -1)) * scale;
  auto weights = torch::softmax(logits, -1);
  return {torch::matmul(weights, v), weights};
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int query_dim, int context_dim, int heads_,
                                               int inner_dim)
    : heads(heads_) {
  if (inner_dim < 0) inner_dim = query_dim;
  VDIT_REQUIRE(inner_dim % heads == 0, ErrorKind::InvalidArgument, std::to_string(inner_dim),
               "attention width must be divisible by the head count");
  to_q = register_module("to_q", torch::nn::Linear(torch::nn::LinearOptions(query_dim, inner_dim).bias(false)));
  to_k = register_module("to_k", torch::nn::Linear(torch::nn::LinearOptions(context_dim, inner_dim).bias(false)));
  to_v = register_module("to_v", torch::nn::Linear(torch::nn::LinearOptions(context_dim, inner_dim).bias(false)));
  to_out = register_module("to_out", torch::nn::Linear(inner_dim, query_dim));
}

AttentionResult MultiHeadAttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& key,
                                                const torch::Tensor& value) {
  VDIT_REQUIRE(query.dim() == 3 && key.dim() == 3 && value.dim() == 3, ErrorKind::ShapeMismatch,
               "attention", "expected [B, L, dim] inputs");
  const auto B = query.size(0);
  const auto Lq = query.size(1);
  const auto Lk = key.size(1);
  auto split = [&](const torch::Tensor& t, int64_t L) {
    return t.view({B, L, heads, -1}).transpose(1, 2);  // [B, h, L, d]
  };
  auto q = split(to_q(query), Lq);
  auto k = split(to_k(key), Lk);
  auto v = split(to_v(value), Lk);
  auto r = scaled_dot_attention(q, k, v);
  auto merged = r.output.transpose(1, 2).reshape({B, Lq, -1});
  return {to_out(merged), r.weights.mean(1)};
}

FeedForwardImpl::FeedForwardImpl(int dim, int hidden) {
  fc1 = register_module("fc1", torch::nn::Linear(dim, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, dim));
}

TransformerBlockImpl::TransformerBlockImpl(int dim, int heads, int ffn_mult) {
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn = register_module("attn", MultiHeadAttention(dim, dim, heads));
  ffn = register_module("ffn", FeedForward(dim, dim * ffn_mult));
}

torch::Tensor TransformerBlockImpl::forward(const torch::Tensor& x) {
  auto h = norm1(x);
  auto y = x + attn->forward(h, h, h).output;
  return y + ffn(norm2(y));
}

torch::Tensor sine_position_encoding_2d(int h, int w, int dim) {
  VDIT_REQUIRE(dim % 4 == 0, ErrorKind::InvalidArgument, std::to_string(dim),
               "2-D positional encoding needs dim % 4 == 0");
  const int quarter = dim / 4;
  auto omega = torch::arange(quarter, torch::kFloat64) / quarter;
  omega = 1.0 / torch::pow(10000.0, omega);
  auto ys = torch::arange(h, torch::kFloat64).unsqueeze(1).expand({h, w}).reshape({-1, 1});
  auto xs = torch::arange(w, torch::kFloat64).unsqueeze(0).expand({h, w}).reshape({-1, 1});
  auto oy = ys * omega.unsqueeze(0);
  auto ox = xs * omega.unsqueeze(0);
  return torch::cat({torch::sin(oy), torch::cos(oy), torch::sin(ox), torch::cos(ox)}, 1)
      .to(torch::kFloat32);
}

torch::Tensor timestep_embedding(int step, int dim) {
  const int half = dim / 2;
  auto freqs = torch::exp(-std::log(10000.0) * torch::arange(half, torch::kFloat64) / half);
  auto args = static_cast<double>(step) * freqs;
  return torch::cat({torch::cos(args), torch::sin(args)}).to(torch::kFloat32);
}

}  // namespace vdit
