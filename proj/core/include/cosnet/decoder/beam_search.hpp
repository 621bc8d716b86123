#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cosnet::decoder {

/// Next-token log-probabilities for a batch of prefixes (each starting with
/// BOS); one vector of vocabulary size per prefix.
using StepScorer =
    std::function<std::vector<std::vector<double>>(const std::vector<std::vector<std::size_t>>& prefixes)>;

struct BeamConfig {
  std::size_t beam = 3;
  std::size_t max_length = 20;  // generated tokens, EOS included
  std::size_t bos = 1;
  std::size_t eos = 2;
  std::vector<std::size_t> banned;  // never generated (e.g. PAD, BOS)
};

struct BeamHypothesis {
  std::vector<std::size_t> tokens;  // without BOS; ends with EOS when finished
  double log_prob = 0.0;
  bool finished = false;
  std::size_t completed_at = 0;  // search step that froze the hypothesis
};

/// Length-capped beam search without length normalisation. Each step keeps
/// the best `beam` expansions of all live hypotheses (ties: lexicographic
/// tokens); EOS expansions are frozen. Hypotheses still live at
/// `max_length` are closed as they stand. The answer has the highest
/// log-probability, then the earliest completion, then the
/// lexicographically smallest tokens.
BeamHypothesis beam_search(const StepScorer& scorer, const BeamConfig& config);

/// Argmax decoding with the same banned-token and length rules.
BeamHypothesis greedy_decode(const StepScorer& scorer, const BeamConfig& config);

}  // namespace cosnet::decoder
