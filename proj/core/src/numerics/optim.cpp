#include "cosnet/numerics/optim.hpp"

#include <algorithm>
#include <cmath>

namespace cosnet {

double noam_rate(std::int64_t step, std::size_t d_model, std::int64_t warmup, double factor) {
  const double s = static_cast<double>(std::max<std::int64_t>(step, 1));
  const double w = static_cast<double>(std::max<std::int64_t>(warmup, 1));
  return factor / std::sqrt(static_cast<double>(d_model)) * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

void Adam::ensure_state(const ParameterStore<float>& params) {
  if (m_.size() == params.count()) return;
  m_.clear();
  v_.clear();
  for (const auto& p : params) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

void Adam::restore(std::int64_t steps, std::vector<Tensor<float>> m, std::vector<Tensor<float>> v) {
  if (m.size() != v.size()) throw ContractError("Adam::restore: moment buffer count mismatch");
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

void Adam::step(ParameterStore<float>& params, double learning_rate) {
  ensure_state(params);
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  std::size_t k = 0;
  for (auto& p : params) {
    auto w = p.value.values();
    auto g = p.grad.values();
    auto m = m_[k].values();
    auto v = v_[k].values();
    if (m.size() != w.size()) throw ContractError("Adam: parameter '" + p.name + "' changed shape");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = learning_rate * (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      w[i] = static_cast<float>(w[i] - update);
      g[i] = 0.0f;
    }
    ++k;
  }
}

}  // namespace cosnet
