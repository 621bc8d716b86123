#pragma once

#include <string>

#include "cosnet/transformer/attention.hpp"

namespace cosnet {

template <std::floating_point T>
struct LayerNormParams {
  Parameter<T>* gain = nullptr;
  Parameter<T>* bias = nullptr;
};

/// Two affine maps with a GELU in between; inner width 4 * D.
template <std::floating_point T>
struct FeedForwardParams {
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Parameter<T>* w2 = nullptr;
  Parameter<T>* b2 = nullptr;
  LayerNormParams<T> norm;
};

/// Self-attention block: norm(X + MHA(X, X, X)) followed by the
/// feed-forward sub-layer.
template <std::floating_point T>
struct BlockParams {
  AttentionParams<T> attention;
  LayerNormParams<T> attention_norm;
  FeedForwardParams<T> ffn;
};

/// Self-attention, then cross-attention into a second token set, then
/// the feed-forward sub-layer.
template <std::floating_point T>
struct CrossBlockParams {
  AttentionParams<T> self_attention;
  LayerNormParams<T> self_norm;
  AttentionParams<T> cross_attention;
  LayerNormParams<T> cross_norm;
  FeedForwardParams<T> ffn;
};

template <std::floating_point T>
LayerNormParams<T> make_layer_norm(ParameterStore<T>& store, const std::string& prefix, std::size_t dim);
template <std::floating_point T>
FeedForwardParams<T> make_feed_forward(ParameterStore<T>& store, const std::string& prefix,
                                       std::size_t dim, Rng& rng);
template <std::floating_point T>
BlockParams<T> make_block(ParameterStore<T>& store, const std::string& prefix, std::size_t dim,
                          std::size_t heads, Rng& rng);
template <std::floating_point T>
CrossBlockParams<T> make_cross_block(ParameterStore<T>& store, const std::string& prefix,
                                     std::size_t dim, std::size_t heads, Rng& rng);

template <std::floating_point T>
Var<T> apply_layer_norm(const LayerNormParams<T>& p, Var<T> x);

/// F(Y) = norm(Y + W2 gelu(Y W1 + b1) + b2).
template <std::floating_point T>
Var<T> feed_forward(const FeedForwardParams<T>& p, Var<T> y);

/// F(norm(X + MHA(X, X, X))).
template <std::floating_point T>
Var<T> encoder_block(const BlockParams<T>& p, Var<T> x);

/// X' = norm(X + MHA(X, X, X)); F(norm(X' + MHA(X', Y, Y))).
template <std::floating_point T>
Var<T> cross_block(const CrossBlockParams<T>& p, Var<T> x, Var<T> y);

}  // namespace cosnet
