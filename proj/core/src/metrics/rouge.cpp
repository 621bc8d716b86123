#include "cosnet/metrics/rouge.hpp"

#include <algorithm>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::metrics {

std::size_t lcs_length(const Caption& a, const Caption& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Caption& candidate, const std::vector<Caption>& references, double beta_squared) {
  if (references.empty()) throw ContractError("ROUGE-L needs at least one reference");
  double best = 0.0;
  if (candidate.empty()) return best;
  for (const auto& r : references) {
    if (r.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(candidate, r));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(candidate.size());
    const double rec = lcs / static_cast<double>(r.size());
    best = std::max(best, (1.0 + beta_squared) * p * rec / (rec + beta_squared * p));
  }
  return best;
}

double corpus_rouge_l(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references) {
  if (candidates.size() != references.size()) throw ContractError("ROUGE-L: candidate/reference count mismatch");
  if (candidates.empty()) throw ContractError("ROUGE-L: empty corpus");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) scores.push_back(rouge_l(candidates[i], references[i]));
  return stable_mean(scores);
}

}  // namespace cosnet::metrics
