#include "cosnet/decoder/beam_search.hpp"

#include <algorithm>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::decoder {

namespace {

void check(const BeamConfig& config) {
  if (config.beam == 0) throw ContractError("beam size must be at least 1");
  if (config.max_length == 0) throw ContractError("maximum length must be at least 1");
}

std::vector<std::vector<std::size_t>> prefixes_of(const std::vector<BeamHypothesis>& live, std::size_t bos) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(live.size());
  for (const auto& h : live) {
    std::vector<std::size_t> p{bos};
    p.insert(p.end(), h.tokens.begin(), h.tokens.end());
    out.push_back(std::move(p));
  }
  return out;
}

bool better_candidate(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

bool better_final(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.completed_at != b.completed_at) return a.completed_at < b.completed_at;
  return a.tokens < b.tokens;
}

}  // namespace

BeamHypothesis beam_search(const StepScorer& scorer, const BeamConfig& config) {
  check(config);
  std::vector<BeamHypothesis> live(1);
  std::vector<BeamHypothesis> finished;
  for (std::size_t step = 1; step <= config.max_length && !live.empty(); ++step) {
    const auto scores = scorer(prefixes_of(live, config.bos));
    if (scores.size() != live.size()) throw ContractError("scorer returned the wrong number of rows");
    std::vector<BeamHypothesis> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      for (std::size_t v = 0; v < scores[h].size(); ++v) {
        if (std::find(config.banned.begin(), config.banned.end(), v) != config.banned.end()) continue;
        BeamHypothesis c;
        c.tokens = live[h].tokens;
        c.tokens.push_back(v);
        c.log_prob = live[h].log_prob + scores[h][v];
        candidates.push_back(std::move(c));
      }
    }
    const std::size_t keep = std::min(config.beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better_candidate);
    candidates.resize(keep);
    live.clear();
    for (auto& c : candidates) {
      if (c.tokens.back() == config.eos || step == config.max_length) {
        c.finished = c.tokens.back() == config.eos;
        c.completed_at = step;
        finished.push_back(std::move(c));
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  if (finished.empty()) throw ContractError("beam search produced no hypothesis (every token banned?)");
  return *std::min_element(finished.begin(), finished.end(), better_final);
}

BeamHypothesis greedy_decode(const StepScorer& scorer, const BeamConfig& config) {
  check(config);
  BeamHypothesis h;
  for (std::size_t step = 1; step <= config.max_length; ++step) {
    std::vector<std::size_t> prefix{config.bos};
    prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
    const auto scores = scorer({prefix});
    std::size_t best = scores[0].size();
    for (std::size_t v = 0; v < scores[0].size(); ++v) {
      if (std::find(config.banned.begin(), config.banned.end(), v) != config.banned.end()) continue;
      if (best == scores[0].size() || scores[0][v] > scores[0][best]) best = v;
    }
    if (best == scores[0].size()) throw ContractError("greedy decoding: every token banned");
    h.tokens.push_back(best);
    h.log_prob += scores[0][best];
    h.completed_at = step;
    if (best == config.eos) {
      h.finished = true;
      break;
    }
  }
  return h;
}

}  // namespace cosnet::decoder
