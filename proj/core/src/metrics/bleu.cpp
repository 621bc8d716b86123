#include "cosnet/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::metrics {

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (matches.size() < other.matches.size()) {
    matches.resize(other.matches.size(), 0);
    totals.resize(other.totals.size(), 0);
  }
  for (std::size_t i = 0; i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const Caption& candidate, const std::vector<Caption>& references, std::size_t max_order) {
  if (max_order == 0) throw ContractError("BLEU order must be at least 1");
  if (references.empty()) throw ContractError("BLEU needs at least one reference");
  BleuStats s;
  s.matches.assign(max_order, 0);
  s.totals.assign(max_order, 0);
  s.candidate_length = candidate.size();
  std::size_t best = references.front().size();
  for (const auto& r : references) {
    const auto gap = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
    };
    if (gap(r.size()) < gap(best) || (gap(r.size()) == gap(best) && r.size() < best)) best = r.size();
  }
  s.reference_length = best;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const auto cand = count_ngrams(candidate, n);
    NGramCounts max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : count_ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    for (const auto& [g, c] : cand) {
      s.totals[n - 1] += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& stats, std::size_t max_order) {
  if (max_order == 0 || stats.matches.size() < max_order) throw ContractError("BLEU stats lack the requested order");
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_order; ++n) {
    if (stats.matches[n] == 0 || stats.totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]));
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double r = static_cast<double>(stats.reference_length);
  const double log_bp = std::min(0.0, 1.0 - r / c);
  return std::exp(log_bp + log_sum / static_cast<double>(max_order));
}

double bleu(const Caption& candidate, const std::vector<Caption>& references, std::size_t max_order) {
  if (candidate.empty()) throw ContractError("BLEU candidate must be non-empty");
  return bleu_from_stats(bleu_stats(candidate, references, max_order), max_order);
}

double corpus_bleu(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references,
                   std::size_t max_order) {
  if (candidates.size() != references.size()) throw ContractError("BLEU: candidate/reference count mismatch");
  if (candidates.empty()) throw ContractError("BLEU: empty corpus");
  BleuStats total;
  total.matches.assign(max_order, 0);
  total.totals.assign(max_order, 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) total += bleu_stats(candidates[i], references[i], max_order);
  return bleu_from_stats(total, max_order);
}

}  // namespace cosnet::metrics
