#pragma once

#include <cstddef>
#include <vector>

#include "cosnet/metrics/ngrams.hpp"

namespace cosnet::metrics {

/// Clipped n-gram matches and candidate n-gram totals per order, plus the
/// lengths that feed the brevity penalty.
struct BleuStats {
  std::vector<std::size_t> matches;  // index n-1
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;  // closest reference length, ties to the shorter

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Caption& candidate, const std::vector<Caption>& references, std::size_t max_order);

/// Geometric mean of the precisions times exp(min(0, 1 - r/c)); any zero
/// precision yields 0 (no smoothing).
double bleu_from_stats(const BleuStats& stats, std::size_t max_order);

/// Sentence-level BLEU. Throws ContractError for an empty candidate, no
/// references or max_order = 0.
double bleu(const Caption& candidate, const std::vector<Caption>& references, std::size_t max_order);

/// Corpus-level BLEU: counts are summed over images before the geometric
/// mean. Empty candidates contribute length 0.
double corpus_bleu(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references,
                   std::size_t max_order);

}  // namespace cosnet::metrics
