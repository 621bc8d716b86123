#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cosnet/transformer/block.hpp"

namespace cosnet::decoder {

template <std::floating_point T>
struct DecoderLayerParams {
  AttentionParams<T> self_attention;
  AttentionParams<T> visual_attention;
  AttentionParams<T> semantic_attention;
  Parameter<T>* gate = nullptr;  // W_g: 2D x D, input order [h^v, h']
  LayerNormParams<T> fusion_norm;
  FeedForwardParams<T> ffn;
};

template <std::floating_point T>
struct DecoderParams {
  Parameter<T>* word_embedding = nullptr;  // V_w x D
  std::vector<DecoderLayerParams<T>> layers;
  Parameter<T>* output_weight = nullptr;  // D x V_w
  Parameter<T>* output_bias = nullptr;    // V_w
  std::size_t max_positions = 21;         // longest accepted input (BOS + words)
};

/// `semantic_branch` = false builds layers without the semantic
/// cross-attention (the visual-only base decoder).
template <std::floating_point T>
DecoderParams<T> make_decoder(ParameterStore<T>& store, const std::string& prefix, std::size_t vocab_size,
                              std::size_t model_dim, std::size_t heads, std::size_t layers,
                              std::size_t max_positions, bool semantic_branch, Rng& rng);

/// h' = MHA(H, H, H) under `mask` (causal or block-causal).
template <std::floating_point T>
Var<T> masked_context(const DecoderLayerParams<T>& layer, Var<T> hidden, const AttentionMask& mask);

/// h^v = MHA(H, V_I, V_I) + MHA(H, V_s, V_s). An invalid `semantics`
/// handle drops the second term.
template <std::floating_point T>
Var<T> fused_cross_context(const DecoderLayerParams<T>& layer, Var<T> hidden, Var<T> visual, Var<T> semantics);

/// g = sigmoid([h^v, h'] W_g); F(norm(H + g * h' + (1 - g) * h^v)).
template <std::floating_point T>
Var<T> gated_fusion(const DecoderLayerParams<T>& layer, Var<T> textual, Var<T> cross, Var<T> residual);

template <std::floating_point T>
Var<T> decoder_layer(const DecoderLayerParams<T>& layer, Var<T> hidden, Var<T> visual, Var<T> semantics,
                     const AttentionMask& mask);

/// Sinusoidal codes for positions 0..count-1, one row each.
template <std::floating_point T>
Tensor<T> sinusoidal_positions(std::size_t count, std::size_t dim);

/// Logits for several BOS-initial sequences decoded against the same image.
/// Sequences are stacked row-wise under a block-causal mask, so row r of the
/// result belongs to the sequence and position it was built from.
template <std::floating_point T>
Var<T> decoder_forward(const DecoderParams<T>& p, const std::vector<std::vector<std::size_t>>& sequences,
                       Var<T> visual, Var<T> semantics);

/// Mean over non-PAD targets of -log softmax(logits)[target].
template <std::floating_point T>
Var<T> caption_loss(Var<T> logits, std::span<const std::size_t> targets, std::size_t pad_index);

/// All terms of the training objective, recorded as plain numbers.
struct LossBreakdown {
  double caption = 0.0;  // L_XE
  double filter = 0.0;   // L_x
  double missing = 0.0;  // L_m
  double semantic = 0.0; // L_s = L_x + L_m
  double total = 0.0;    // L = L_s + L_XE
};

LossBreakdown total_loss(double caption, double filter, double missing);

}  // namespace cosnet::decoder
