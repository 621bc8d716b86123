#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "cosnet/numerics/parameters.hpp"

namespace cosnet {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coordinates = 0;
};

/// |a - n| / max(1e-8, |a| + |n|) for one coordinate.
double relative_error(double analytic, double numeric);

/// Compares the reverse-mode gradient of a scalar function against central
/// differences with step `eps` (expected in [1e-7, 1e-3]).
template <std::floating_point T>
GradCheckResult finite_diff_check(const std::function<Var<T>(Graph<T>&, Var<T>)>& f,
                                  const Tensor<T>& x, double eps);

struct ParameterCheck {
  std::string name;
  GradCheckResult result;
};

/// Same comparison over every coordinate of every parameter in `store`.
/// `loss` must build the forward pass on the given record and return a
/// one-element node; it is re-evaluated for each perturbation.
template <std::floating_point T>
std::vector<ParameterCheck> check_parameters(ParameterStore<T>& store,
                                             const std::function<Var<T>(Graph<T>&)>& loss,
                                             double eps);

}  // namespace cosnet
