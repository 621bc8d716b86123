#include "cosnet/numerics/parameters.hpp"

#include <cmath>

namespace cosnet {

template <std::floating_point T>
Parameter<T>& ParameterStore<T>::create(const std::string& name, Shape shape) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  Tensor<T> value(shape);
  params_.push_back(Parameter<T>{name, value, Tensor<T>(shape)});
  return params_.back();
}

template <std::floating_point T>
Parameter<T>* ParameterStore<T>::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <std::floating_point T>
const Parameter<T>* ParameterStore<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <std::floating_point T>
std::size_t ParameterStore<T>::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <std::floating_point T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.grad.fill(T(0));
}

template <std::floating_point T>
void xavier_uniform(Parameter<T>& p, Rng& rng, double gain) {
  const auto& s = p.value.shape();
  const double fan_in = static_cast<double>(s.front());
  const double fan_out = static_cast<double>(s.back());
  const double bound = gain * std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : p.value.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <std::floating_point T>
void fill_normal(Parameter<T>& p, Rng& rng, double stddev) {
  for (auto& v : p.value.values()) v = static_cast<T>(stddev * rng.normal());
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template void xavier_uniform(Parameter<float>&, Rng&, double);
template void xavier_uniform(Parameter<double>&, Rng&, double);
template void fill_normal(Parameter<float>&, Rng&, double);
template void fill_normal(Parameter<double>&, Rng&, double);

}  // namespace cosnet
