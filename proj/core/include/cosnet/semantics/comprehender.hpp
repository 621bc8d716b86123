#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cosnet/transformer/block.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
struct ComprehenderParams {
  Parameter<T>* slots = nullptr;          // O: N_o x D
  Parameter<T>* cue_embedding = nullptr;  // (N_c + 1) x D
  std::vector<CrossBlockParams<T>> blocks;
};

template <std::floating_point T>
ComprehenderParams<T> make_comprehender(ParameterStore<T>& store, const std::string& prefix,
                                        std::size_t model_dim, std::size_t heads, std::size_t layers,
                                        std::size_t slots, std::size_t semantic_vocab_size, Rng& rng);

template <std::floating_point T>
struct SemanticTokens {
  Var<T> tokens;  // slots first, then cues: (N_o + N_r) x D
  std::size_t slot_count = 0;
  std::vector<std::size_t> cue_indices;

  std::size_t cue_count() const noexcept { return cue_indices.size(); }
};

/// V_s^(0) = [O; E[cues]] run through the cross blocks against the visual
/// tokens. Cues carry no positional information. Throws ContractError for
/// an index that is not a semantic word (including the irrelevant token).
template <std::floating_point T>
SemanticTokens<T> comprehend(const ComprehenderParams<T>& p, std::span<const std::size_t> cue_indices,
                             Var<T> visual_tokens);

}  // namespace cosnet::semantics
