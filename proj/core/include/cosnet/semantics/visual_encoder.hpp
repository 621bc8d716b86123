#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cosnet/transformer/block.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
struct VisualEncoderParams {
  Parameter<T>* global_weight = nullptr;  // D_in x D
  Parameter<T>* global_bias = nullptr;    // D
  Parameter<T>* grid_weight = nullptr;    // D_in x D
  Parameter<T>* grid_bias = nullptr;      // D
  std::vector<BlockParams<T>> blocks;     // N_v
  Parameter<T>* combine = nullptr;        // W_c: ((N_v + 1) D) x D
};

template <std::floating_point T>
VisualEncoderParams<T> make_visual_encoder(ParameterStore<T>& store, const std::string& prefix,
                                           std::size_t input_dim, std::size_t model_dim, std::size_t heads,
                                           std::size_t layers, Rng& rng);

template <std::floating_point T>
struct VisualTokens {
  Var<T> tokens;  // [v~_c; grid tokens of the last block], (N_I + 1) x D
  Var<T> holistic_global;
  std::vector<Var<T>> layer_globals;  // v_c^(0..N_v), each 1 x D
};

/// Affine maps of the global feature and the grid cells into width D,
/// stacked as [global; grids].
template <std::floating_point T>
Var<T> project_visual_inputs(const VisualEncoderParams<T>& p, Var<T> global, Var<T> grids);

/// Runs the self-attention stack, keeps the global row of every layer and
/// folds them through W_c into the holistic global token.
template <std::floating_point T>
VisualTokens<T> encode_visual(const VisualEncoderParams<T>& p, Var<T> projected);

}  // namespace cosnet::semantics
