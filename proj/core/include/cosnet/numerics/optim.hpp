#pragma once

#include <cstdint>
#include <vector>

#include "cosnet/numerics/parameters.hpp"

namespace cosnet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

/// Inverse-square-root schedule with linear warmup:
/// factor * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5), step >= 1.
double noam_rate(std::int64_t step, std::size_t d_model, std::int64_t warmup, double factor);

class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  /// Applies one update using Parameter::grad, then zeroes the gradients.
  void step(ParameterStore<float>& params, double learning_rate);

  std::int64_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return config_; }

  // Moment buffers are laid out in store order; exposed for checkpointing.
  std::vector<Tensor<float>>& first_moments() { return m_; }
  std::vector<Tensor<float>>& second_moments() { return v_; }
  const std::vector<Tensor<float>>& first_moments() const { return m_; }
  const std::vector<Tensor<float>>& second_moments() const { return v_; }
  void restore(std::int64_t steps, std::vector<Tensor<float>> m, std::vector<Tensor<float>> v);

 private:
  void ensure_state(const ParameterStore<float>& params);

  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<Tensor<float>> m_;
  std::vector<Tensor<float>> v_;
};

}  // namespace cosnet
