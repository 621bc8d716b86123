#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cosnet/numerics/gradcheck.hpp"

namespace cosnet::app {

struct GradCheckReport {
  std::vector<ParameterCheck> parameters;
  double max_rel_error = 0.0;
  double tolerance = 1e-4;
  double seconds = 0.0;
  bool passed() const noexcept { return max_rel_error < tolerance; }
};

/// Finite-difference check of every trainable parameter of a tiny model
/// (D=16, one block per stack, two slots, two cues, 12 words) in double
/// precision, through the full training objective.
GradCheckReport run_grad_check(std::uint64_t seed, double tolerance, std::ostream* log);

}  // namespace cosnet::app
