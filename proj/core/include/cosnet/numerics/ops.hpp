#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cosnet/numerics/graph.hpp"

// Differentiable operations over the compute record. Matrix operations take
// rank-2 inputs; rank-1 inputs are accepted wherever a single row makes
// sense and are treated as 1 x n.

namespace cosnet {

inline constexpr double kLayerNormEps = 1e-5;

template <std::floating_point T> Var<T> matmul(Var<T> a, Var<T> b);
/// a * b^T without materialising the transpose as a node.
template <std::floating_point T> Var<T> matmul_nt(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> transpose(Var<T> a);

template <std::floating_point T> Var<T> add(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> sub(Var<T> a, Var<T> b);
/// Element-wise product.
template <std::floating_point T> Var<T> mul(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> scale(Var<T> a, T factor);
/// Adds a length-n row to every row of an m x n matrix.
template <std::floating_point T> Var<T> add_row(Var<T> a, Var<T> row);

template <std::floating_point T> Var<T> sum(Var<T> a);
template <std::floating_point T> Var<T> mean(Var<T> a);

/// Max-subtracted softmax along `axis` (0 or 1 for matrices, 0 for vectors).
template <std::floating_point T> Var<T> softmax(Var<T> x, int axis);
/// Row-wise log-softmax.
template <std::floating_point T> Var<T> log_softmax(Var<T> x);
template <std::floating_point T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, double eps = kLayerNormEps);

/// Tanh-approximated GELU.
template <std::floating_point T> Var<T> gelu(Var<T> x);
template <std::floating_point T> Var<T> sigmoid(Var<T> x);
template <std::floating_point T> Var<T> log(Var<T> x);

template <std::floating_point T> Var<T> concat_rows(std::span<const Var<T>> parts);
template <std::floating_point T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <std::floating_point T> Var<T> slice_rows(Var<T> x, std::size_t begin, std::size_t count);
template <std::floating_point T> Var<T> slice_cols(Var<T> x, std::size_t begin, std::size_t count);
/// Selects table rows by index (embedding lookup).
template <std::floating_point T>
Var<T> gather_rows(Var<T> table, std::span<const std::size_t> indices);
/// Coordinate-wise maximum over rows: m x n -> 1 x n. Ties route the
/// gradient to the first maximal row.
template <std::floating_point T> Var<T> max_over_rows(Var<T> x);
/// out[i] = x[i, index[i]] as an n-vector.
template <std::floating_point T> Var<T> pick(Var<T> x, std::span<const std::size_t> index);

/// Mean over rows whose target differs from `ignore_index` of
/// -log_softmax(logits)[row, target]. Returns 0 when every row is ignored.
template <std::floating_point T>
Var<T> cross_entropy(Var<T> logits, std::span<const std::size_t> targets,
                     std::size_t ignore_index);

}  // namespace cosnet
