#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cosnet/numerics/ops.hpp"
#include "cosnet/numerics/parameters.hpp"

namespace cosnet {

/// Boolean admissibility matrix for attention scores (1 = visible).
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  static AttentionMask all(std::size_t rows, std::size_t cols);
  /// Position i sees positions 0..i.
  static AttentionMask causal(std::size_t n);
  /// Several causal sequences stacked row-wise; no attention across blocks.
  static AttentionMask block_causal(const std::vector<std::size_t>& lengths);

  bool operator()(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }
  void set(std::size_t r, std::size_t c, bool visible) { allowed[r * cols + c] = visible ? 1 : 0; }
};

/// Projections of one multi-head attention layer. The per-head matrices
/// W_i^Q, W_i^K, W_i^V (D x d_h) are stored side by side as D x (h * d_h);
/// head i owns columns [i * d_h, (i + 1) * d_h).
template <std::floating_point T>
struct AttentionParams {
  Parameter<T>* query = nullptr;
  Parameter<T>* key = nullptr;
  Parameter<T>* value = nullptr;
  Parameter<T>* output = nullptr;
  std::size_t heads = 1;
  std::size_t model_dim = 0;

  std::size_t head_dim() const { return model_dim / heads; }
};

template <std::floating_point T>
AttentionParams<T> make_attention(ParameterStore<T>& store, const std::string& prefix,
                                  std::size_t model_dim, std::size_t heads, Rng& rng);

/// Scaled dot-product attention per head, heads concatenated and projected
/// by W^O. Masked scores get -1e9 before the softmax. When `weights` is
/// given it receives one row-stochastic n_q x n_k matrix per head.
template <std::floating_point T>
Var<T> multi_head_attention(const AttentionParams<T>& params, Var<T> q, Var<T> k, Var<T> v,
                            const AttentionMask* mask = nullptr,
                            std::vector<Tensor<T>>* weights = nullptr);

}  // namespace cosnet
