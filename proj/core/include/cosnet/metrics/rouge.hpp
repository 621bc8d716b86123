#pragma once

#include <vector>

#include "cosnet/metrics/ngrams.hpp"

namespace cosnet::metrics {

inline constexpr double kRougeBetaSquared = 1.2;

std::size_t lcs_length(const Caption& a, const Caption& b);

/// LCS F-measure (1 + b^2) P R / (R + b^2 P), maximised over references.
double rouge_l(const Caption& candidate, const std::vector<Caption>& references,
               double beta_squared = kRougeBetaSquared);

/// Mean sentence score over the corpus.
double corpus_rouge_l(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references);

}  // namespace cosnet::metrics
