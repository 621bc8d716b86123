#include "cosnet/transformer/block.hpp"

namespace cosnet {

template <std::floating_point T>
LayerNormParams<T> make_layer_norm(ParameterStore<T>& store, const std::string& prefix, std::size_t dim) {
  LayerNormParams<T> p;
  p.gain = &store.create(prefix + ".gain", {dim});
  p.bias = &store.create(prefix + ".bias", {dim});
  p.gain->value.fill(T(1));
  return p;
}

template <std::floating_point T>
FeedForwardParams<T> make_feed_forward(ParameterStore<T>& store, const std::string& prefix,
                                       std::size_t dim, Rng& rng) {
  FeedForwardParams<T> p;
  p.w1 = &store.create(prefix + ".w1", {dim, 4 * dim});
  p.b1 = &store.create(prefix + ".b1", {4 * dim});
  p.w2 = &store.create(prefix + ".w2", {4 * dim, dim});
  p.b2 = &store.create(prefix + ".b2", {dim});
  xavier_uniform(*p.w1, rng);
  xavier_uniform(*p.w2, rng);
  p.norm = make_layer_norm(store, prefix + ".norm", dim);
  return p;
}

template <std::floating_point T>
BlockParams<T> make_block(ParameterStore<T>& store, const std::string& prefix, std::size_t dim,
                          std::size_t heads, Rng& rng) {
  BlockParams<T> p;
  p.attention = make_attention(store, prefix + ".attn", dim, heads, rng);
  p.attention_norm = make_layer_norm(store, prefix + ".attn_norm", dim);
  p.ffn = make_feed_forward(store, prefix + ".ffn", dim, rng);
  return p;
}

template <std::floating_point T>
CrossBlockParams<T> make_cross_block(ParameterStore<T>& store, const std::string& prefix,
                                     std::size_t dim, std::size_t heads, Rng& rng) {
  CrossBlockParams<T> p;
  p.self_attention = make_attention(store, prefix + ".self_attn", dim, heads, rng);
  p.self_norm = make_layer_norm(store, prefix + ".self_norm", dim);
  p.cross_attention = make_attention(store, prefix + ".cross_attn", dim, heads, rng);
  p.cross_norm = make_layer_norm(store, prefix + ".cross_norm", dim);
  p.ffn = make_feed_forward(store, prefix + ".ffn", dim, rng);
  return p;
}

template <std::floating_point T>
Var<T> apply_layer_norm(const LayerNormParams<T>& p, Var<T> x) {
  Graph<T>& g = x.graph();
  return layer_norm(x, g.param(*p.gain), g.param(*p.bias));
}

template <std::floating_point T>
Var<T> feed_forward(const FeedForwardParams<T>& p, Var<T> y) {
  Graph<T>& g = y.graph();
  Var<T> hidden = gelu(add_row(matmul(y, g.param(*p.w1)), g.param(*p.b1)));
  Var<T> out = add_row(matmul(hidden, g.param(*p.w2)), g.param(*p.b2));
  return apply_layer_norm(p.norm, add(y, out));
}

template <std::floating_point T>
Var<T> encoder_block(const BlockParams<T>& p, Var<T> x) {
  Var<T> attended = multi_head_attention(p.attention, x, x, x);
  return feed_forward(p.ffn, apply_layer_norm(p.attention_norm, add(x, attended)));
}

template <std::floating_point T>
Var<T> cross_block(const CrossBlockParams<T>& p, Var<T> x, Var<T> y) {
  Var<T> self = multi_head_attention(p.self_attention, x, x, x);
  Var<T> x_prime = apply_layer_norm(p.self_norm, add(x, self));
  Var<T> cross = multi_head_attention(p.cross_attention, x_prime, y, y);
  return feed_forward(p.ffn, apply_layer_norm(p.cross_norm, add(x_prime, cross)));
}

#define COSNET_INSTANTIATE_BLOCKS(T)                                                                  \
  template LayerNormParams<T> make_layer_norm(ParameterStore<T>&, const std::string&, std::size_t);  \
  template FeedForwardParams<T> make_feed_forward(ParameterStore<T>&, const std::string&,           \
                                                  std::size_t, Rng&);                                \
  template BlockParams<T> make_block(ParameterStore<T>&, const std::string&, std::size_t,           \
                                     std::size_t, Rng&);                                             \
  template CrossBlockParams<T> make_cross_block(ParameterStore<T>&, const std::string&,             \
                                                std::size_t, std::size_t, Rng&);                     \
  template Var<T> apply_layer_norm(const LayerNormParams<T>&, Var<T>);                              \
  template Var<T> feed_forward(const FeedForwardParams<T>&, Var<T>);                                \
  template Var<T> encoder_block(const BlockParams<T>&, Var<T>);                                     \
  template Var<T> cross_block(const CrossBlockParams<T>&, Var<T>, Var<T>);

COSNET_INSTANTIATE_BLOCKS(float)
COSNET_INSTANTIATE_BLOCKS(double)

#undef COSNET_INSTANTIATE_BLOCKS

}  // namespace cosnet
