// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

// Attention and feed-forward building blocks shared by the encoders, the
// denoising U-Net and the mask head.

#pragma once

#include <torch/torch.h>

namespace vdit {

struct AttentionResult {
  torch::Tensor output;   // [..., Lq, d]
  torch::Tensor weights;  // [..., Lq, Lk], rows sum to 1
};

/// softmax(q k^T / sqrt(d)) v over the last two dimensions.
AttentionResult scaled_dot_attention(const torch::Tensor& q, const torch::Tensor& k,
                                     const torch::Tensor& v);

/// Multi-head attention with separate query / key / value inputs.
/// Inputs are [B, L, dim]; weights returned averaged over heads.
class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(int query_dim, int context_dim, int heads, int inner_dim = -1);

  AttentionResult forward(const torch::Tensor& query, const torch::Tensor& key,
                          const torch::Tensor& value);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& context) {
    return forward(x, context, context).output;
  }

  torch::nn::Linear to_q{nullptr}, to_k{nullptr}, to_v{nullptr}, to_out{nullptr};
  int heads;
};
TORCH_MODULE(MultiHeadAttention);

class FeedForwardImpl : public torch::nn::Module {
 public:
  FeedForwardImpl(int dim, int hidden);
  torch::Tensor forward(const torch::Tensor& x) { return fc2(torch::gelu(fc1(x))); }

  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(FeedForward);

/// Pre-norm self-attention transformer block.
class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int dim, int heads, int ffn_mult = 4);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  MultiHeadAttention attn{nullptr};
  FeedForward ffn{nullptr};
};
TORCH_MODULE(TransformerBlock);

/// Fixed 2-D sine/cosine positional encoding, [h * w, dim] (dim % 4 == 0).
torch::Tensor sine_position_encoding_2d(int h, int w, int dim);

/// Sinusoidal embedding of a diffusion step, [dim].
torch::Tensor timestep_embedding(int step, int dim);

}  // namespace vdit
