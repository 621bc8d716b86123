#include "cosnet/metrics/ngrams.hpp"

#include <cmath>

namespace cosnet::metrics {

NGramCounts count_ngrams(const Caption& tokens, std::size_t n) {
  NGramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double stable_mean(std::span<const double> values) {
  return values.empty() ? 0.0 : stable_sum(values) / static_cast<double>(values.size());
}

}  // namespace cosnet::metrics
