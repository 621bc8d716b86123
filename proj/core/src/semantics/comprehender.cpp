#include "cosnet/semantics/comprehender.hpp"

#include "cosnet/numerics/errors.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
ComprehenderParams<T> make_comprehender(ParameterStore<T>& store, const std::string& prefix,
                                        std::size_t model_dim, std::size_t heads, std::size_t layers,
                                        std::size_t slots, std::size_t semantic_vocab_size, Rng& rng) {
  if (slots == 0) throw ContractError("the comprehender needs at least one slot");
  if (semantic_vocab_size < 2) throw ContractError("semantic vocabulary must hold a word and the irrelevant token");
  ComprehenderParams<T> p;
  p.slots = &store.create(prefix + ".slots", {slots, model_dim});
  p.cue_embedding = &store.create(prefix + ".cue_embedding", {semantic_vocab_size, model_dim});
  fill_normal(*p.slots, rng, 1.0);
  fill_normal(*p.cue_embedding, rng, 1.0);
  for (std::size_t i = 0; i < layers; ++i) {
    p.blocks.push_back(make_cross_block(store, prefix + ".block" + std::to_string(i), model_dim, heads, rng));
  }
  return p;
}

template <std::floating_point T>
SemanticTokens<T> comprehend(const ComprehenderParams<T>& p, std::span<const std::size_t> cue_indices,
                             Var<T> visual_tokens) {
  const std::size_t words = p.cue_embedding->value.rows() - 1;
  for (std::size_t idx : cue_indices) {
    if (idx >= words) {
      throw ContractError("cue index " + std::to_string(idx) + " is not a semantic word (N_c = " +
                          std::to_string(words) + ")");
    }
  }
  Graph<T>& g = visual_tokens.graph();
  SemanticTokens<T> out;
  out.slot_count = p.slots->value.rows();
  out.cue_indices.assign(cue_indices.begin(), cue_indices.end());
  Var<T> x = g.param(*p.slots);
  if (!cue_indices.empty()) {
    const Var<T> parts[] = {x, gather_rows(g.param(*p.cue_embedding), cue_indices)};
    x = concat_rows<T>(parts);
  }
  for (const auto& block : p.blocks) x = cross_block(block, x, visual_tokens);
  out.tokens = x;
  return out;
}

#define COSNET_INSTANTIATE(T)                                                                            \
  template ComprehenderParams<T> make_comprehender(ParameterStore<T>&, const std::string&, std::size_t,  \
                                                   std::size_t, std::size_t, std::size_t, std::size_t,   \
                                                   Rng&);                                                \
  template SemanticTokens<T> comprehend(const ComprehenderParams<T>&, std::span<const std::size_t>, Var<T>);
COSNET_INSTANTIATE(float)
COSNET_INSTANTIATE(double)
#undef COSNET_INSTANTIATE

}  // namespace cosnet::semantics
