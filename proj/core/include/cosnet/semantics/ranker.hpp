#pragma once

#include <cstddef>
#include <string>

#include "cosnet/numerics/ops.hpp"
#include "cosnet/numerics/parameters.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
struct RankerParams {
  Parameter<T>* codebook = nullptr;  // V_p: N_p x D
};

template <std::floating_point T>
RankerParams<T> make_ranker(ParameterStore<T>& store, const std::string& prefix, std::size_t positions,
                            std::size_t model_dim, Rng& rng);

template <std::floating_point T>
struct PositionAwareSemantics {
  Var<T> tokens;     // v~ + p
  Var<T> weights;    // softmax(v~ V_p^T), one row per token
  Var<T> positions;  // p = weights V_p
};

/// Soft position assignment: each token attends over the codebook with its
/// raw value as the query and adds the attended encoding.
template <std::floating_point T>
PositionAwareSemantics<T> rank_semantics(const RankerParams<T>& p, Var<T> tokens);

}  // namespace cosnet::semantics
