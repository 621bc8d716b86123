#include "cosnet/decoder/decoder.hpp"

#include <cmath>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::decoder {

template <std::floating_point T>
DecoderParams<T> make_decoder(ParameterStore<T>& store, const std::string& prefix, std::size_t vocab_size,
                              std::size_t model_dim, std::size_t heads, std::size_t layers,
                              std::size_t max_positions, bool semantic_branch, Rng& rng) {
  if (layers == 0) throw ContractError("decoder needs at least one layer");
  if (max_positions == 0) throw ContractError("decoder needs a positive maximum length");
  DecoderParams<T> p;
  p.max_positions = max_positions;
  p.word_embedding = &store.create(prefix + ".word_embedding", {vocab_size, model_dim});
  xavier_uniform(*p.word_embedding, rng);
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string name = prefix + ".layer" + std::to_string(i);
    DecoderLayerParams<T> layer;
    layer.self_attention = make_attention(store, name + ".self_attn", model_dim, heads, rng);
    layer.visual_attention = make_attention(store, name + ".visual_attn", model_dim, heads, rng);
    if (semantic_branch) {
      layer.semantic_attention = make_attention(store, name + ".semantic_attn", model_dim, heads, rng);
    }
    layer.gate = &store.create(name + ".gate", {2 * model_dim, model_dim});
    xavier_uniform(*layer.gate, rng);
    layer.fusion_norm = make_layer_norm(store, name + ".fusion_norm", model_dim);
    layer.ffn = make_feed_forward(store, name + ".ffn", model_dim, rng);
    p.layers.push_back(layer);
  }
  p.output_weight = &store.create(prefix + ".output.weight", {model_dim, vocab_size});
  p.output_bias = &store.create(prefix + ".output.bias", {vocab_size});
  xavier_uniform(*p.output_weight, rng);
  return p;
}

template <std::floating_point T>
Var<T> masked_context(const DecoderLayerParams<T>& layer, Var<T> hidden, const AttentionMask& mask) {
  return multi_head_attention(layer.self_attention, hidden, hidden, hidden, &mask);
}

template <std::floating_point T>
Var<T> fused_cross_context(const DecoderLayerParams<T>& layer, Var<T> hidden, Var<T> visual, Var<T> semantics) {
  Var<T> out = multi_head_attention(layer.visual_attention, hidden, visual, visual);
  if (semantics.valid()) {
    if (layer.semantic_attention.query == nullptr) {
      throw ContractError("decoder layer was built without a semantic branch");
    }
    out = add(out, multi_head_attention(layer.semantic_attention, hidden, semantics, semantics));
  }
  return out;
}

template <std::floating_point T>
Var<T> gated_fusion(const DecoderLayerParams<T>& layer, Var<T> textual, Var<T> cross, Var<T> residual) {
  Graph<T>& g = textual.graph();
  const Var<T> both[] = {cross, textual};
  Var<T> gate = sigmoid(matmul(concat_cols<T>(both), g.param(*layer.gate)));
  // g * h' + (1 - g) * h^v  ==  h^v + g * (h' - h^v)
  Var<T> fused = add(cross, mul(gate, sub(textual, cross)));
  Var<T> normed = apply_layer_norm(layer.fusion_norm, add(residual, fused));
  return feed_forward(layer.ffn, normed);
}

template <std::floating_point T>
Var<T> decoder_layer(const DecoderLayerParams<T>& layer, Var<T> hidden, Var<T> visual, Var<T> semantics,
                     const AttentionMask& mask) {
  Var<T> textual = masked_context(layer, hidden, mask);
  Var<T> cross = fused_cross_context(layer, hidden, visual, semantics);
  return gated_fusion(layer, textual, cross, hidden);
}

template <std::floating_point T>
Tensor<T> sinusoidal_positions(std::size_t count, std::size_t dim) {
  Tensor<T> pe({count, dim});
  for (std::size_t pos = 0; pos < count; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * freq;
      pe(pos, i) = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

template <std::floating_point T>
Var<T> decoder_forward(const DecoderParams<T>& p, const std::vector<std::vector<std::size_t>>& sequences,
                       Var<T> visual, Var<T> semantics) {
  if (sequences.empty()) throw ContractError("decoder_forward needs at least one sequence");
  Graph<T>& g = visual.graph();
  const std::size_t vocab = p.word_embedding->value.rows();
  const std::size_t dim = p.word_embedding->value.cols();
  std::vector<std::size_t> ids, lengths;
  for (const auto& s : sequences) {
    if (s.empty()) throw ContractError("decoder_forward: empty sequence");
    if (s.size() > p.max_positions) {
      throw ContractError("decoder input of length " + std::to_string(s.size()) + " exceeds the maximum of " +
                          std::to_string(p.max_positions));
    }
    for (std::size_t id : s) {
      if (id >= vocab) throw ContractError("token id " + std::to_string(id) + " outside the word vocabulary");
    }
    ids.insert(ids.end(), s.begin(), s.end());
    lengths.push_back(s.size());
  }
  const Tensor<T> table = sinusoidal_positions<T>(p.max_positions, dim);
  Tensor<T> positions({ids.size(), dim});
  std::size_t row = 0;
  for (std::size_t len : lengths) {
    for (std::size_t t = 0; t < len; ++t, ++row) {
      std::copy(table.row(t).begin(), table.row(t).end(), positions.row(row).begin());
    }
  }
  Var<T> hidden = add(gather_rows(g.param(*p.word_embedding), std::span<const std::size_t>(ids)),
                      g.constant(std::move(positions)));
  const AttentionMask mask = AttentionMask::block_causal(lengths);
  for (const auto& layer : p.layers) hidden = decoder_layer(layer, hidden, visual, semantics, mask);
  return add_row(matmul(hidden, g.param(*p.output_weight)), g.param(*p.output_bias));
}

template <std::floating_point T>
Var<T> caption_loss(Var<T> logits, std::span<const std::size_t> targets, std::size_t pad_index) {
  if (logits.rows() != targets.size()) {
    throw ShapeError("caption_loss: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(logits.rows()) + " logit rows");
  }
  return cross_entropy(logits, targets, pad_index);
}

LossBreakdown total_loss(double caption, double filter, double missing) {
  LossBreakdown b;
  b.caption = caption;
  b.filter = filter;
  b.missing = missing;
  b.semantic = filter + missing;
  b.total = b.semantic + caption;
  return b;
}

#define COSNET_INSTANTIATE(T)                                                                              \
  template DecoderParams<T> make_decoder(ParameterStore<T>&, const std::string&, std::size_t, std::size_t, \
                                         std::size_t, std::size_t, std::size_t, bool, Rng&);               \
  template Var<T> masked_context(const DecoderLayerParams<T>&, Var<T>, const AttentionMask&);              \
  template Var<T> fused_cross_context(const DecoderLayerParams<T>&, Var<T>, Var<T>, Var<T>);               \
  template Var<T> gated_fusion(const DecoderLayerParams<T>&, Var<T>, Var<T>, Var<T>);                      \
  template Var<T> decoder_layer(const DecoderLayerParams<T>&, Var<T>, Var<T>, Var<T>, const AttentionMask&); \
  template Tensor<T> sinusoidal_positions(std::size_t, std::size_t);                                       \
  template Var<T> decoder_forward(const DecoderParams<T>&, const std::vector<std::vector<std::size_t>>&,   \
                                  Var<T>, Var<T>);                                                         \
  template Var<T> caption_loss(Var<T>, std::span<const std::size_t>, std::size_t);
COSNET_INSTANTIATE(float)
COSNET_INSTANTIATE(double)
#undef COSNET_INSTANTIATE

}  // namespace cosnet::decoder
