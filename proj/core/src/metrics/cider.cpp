#include "cosnet/metrics/cider.hpp"

#include <cmath>
#include <set>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::metrics {

CiderCorpus::CiderCorpus(const std::vector<std::vector<Caption>>& references, std::size_t max_order)
    : images_(references.size()) {
  for (const auto& refs : references) {
    std::set<NGram> seen;
    for (const auto& r : refs) {
      for (std::size_t n = 1; n <= max_order; ++n) {
        for (const auto& [g, c] : count_ngrams(r, n)) seen.insert(g);
      }
    }
    for (const auto& g : seen) ++df_[g];
  }
}

std::size_t CiderCorpus::document_frequency(const NGram& gram) const {
  auto it = df_.find(gram);
  return it == df_.end() ? 0 : it->second;
}

double CiderCorpus::idf(const NGram& gram) const {
  const double log_n = images_ <= 1 ? 1.0 : std::log(static_cast<double>(images_));
  return log_n - std::log(std::max<double>(1.0, static_cast<double>(document_frequency(gram))));
}

namespace {

using Weighted = std::map<NGram, double>;

Weighted tfidf(const Caption& tokens, std::size_t n, const CiderCorpus& corpus) {
  Weighted out;
  for (const auto& [g, c] : count_ngrams(tokens, n)) out[g] = static_cast<double>(c) * corpus.idf(g);
  return out;
}

double norm(const Weighted& v) {
  double s = 0.0;
  for (const auto& [g, w] : v) s += w * w;
  return std::sqrt(s);
}

double cosine(const Weighted& a, const Weighted& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (const auto& [g, w] : a) {
    auto it = b.find(g);
    if (it != b.end()) dot += w * it->second;
  }
  return dot / (na * nb);
}

}  // namespace

std::vector<double> cider_scores(const std::vector<Caption>& candidates,
                                 const std::vector<std::vector<Caption>>& references, const CiderOptions& options) {
  if (candidates.size() != references.size()) throw ContractError("CIDEr: candidate/reference count mismatch");
  if (candidates.empty()) throw ContractError("CIDEr: empty corpus");
  const CiderCorpus corpus(references, options.max_order);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& refs = references[i];
    if (refs.empty()) throw ContractError("CIDEr: image without references");
    double total = 0.0;
    for (std::size_t n = 1; n <= options.max_order; ++n) {
      const Weighted cand = tfidf(candidates[i], n, corpus);
      double per_order = 0.0;
      for (const auto& r : refs) {
        const double delta = static_cast<double>(candidates[i].size()) - static_cast<double>(r.size());
        const double penalty = std::exp(-(delta * delta) / (2.0 * options.sigma * options.sigma));
        per_order += cosine(cand, tfidf(r, n, corpus)) * penalty;
      }
      total += per_order / static_cast<double>(refs.size());
    }
    scores.push_back(options.scale * total / static_cast<double>(options.max_order));
  }
  return scores;
}

double cider(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references,
             const CiderOptions& options) {
  const auto scores = cider_scores(candidates, references, options);
  return stable_mean(scores);
}

}  // namespace cosnet::metrics
