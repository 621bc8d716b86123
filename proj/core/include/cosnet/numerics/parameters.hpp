#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <unordered_map>

#include "cosnet/numerics/graph.hpp"
#include "cosnet/numerics/random.hpp"

namespace cosnet {

/// Owns named parameters with stable addresses.
template <std::floating_point T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  /// Zero-filled parameter; duplicate names are rejected.
  Parameter<T>& create(const std::string& name, Shape shape);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  std::size_t count() const noexcept { return params_.size(); }
  std::size_t total_elements() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  Parameter<T>& at(std::size_t i) { return params_[i]; }
  const Parameter<T>& at(std::size_t i) const { return params_[i]; }

 private:
  std::deque<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Glorot-uniform fill: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
/// using the first and last dimensions as fans.
template <std::floating_point T>
void xavier_uniform(Parameter<T>& p, Rng& rng, double gain = 1.0);

template <std::floating_point T>
void fill_normal(Parameter<T>& p, Rng& rng, double stddev);

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;

}  // namespace cosnet
