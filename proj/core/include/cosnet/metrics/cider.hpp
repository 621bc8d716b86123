#pragma once

#include <cstddef>
#include <vector>

#include "cosnet/metrics/ngrams.hpp"

namespace cosnet::metrics {

struct CiderOptions {
  std::size_t max_order = 4;
  double sigma = 6.0;
  double scale = 10.0;
};

/// Document frequencies over the reference sets: df(g) = number of images
/// with at least one reference containing g.
class CiderCorpus {
 public:
  explicit CiderCorpus(const std::vector<std::vector<Caption>>& references, std::size_t max_order = 4);

  std::size_t images() const noexcept { return images_; }
  std::size_t document_frequency(const NGram& gram) const;
  /// log(N) - log(max(1, df)). A one-image corpus uses 1 in place of log(N),
  /// otherwise every weight would vanish.
  double idf(const NGram& gram) const;

 private:
  std::size_t images_;
  std::map<NGram, std::size_t> df_;
};

/// Per-image scores: for each order, cosine of TF-IDF vectors times
/// exp(-(l_c - l_r)^2 / (2 sigma^2)), averaged over references and orders,
/// times `scale`. Zero-norm vectors score 0.
std::vector<double> cider_scores(const std::vector<Caption>& candidates,
                                 const std::vector<std::vector<Caption>>& references,
                                 const CiderOptions& options = {});

/// Corpus mean of cider_scores; throws ContractError on an empty corpus.
double cider(const std::vector<Caption>& candidates, const std::vector<std::vector<Caption>>& references,
             const CiderOptions& options = {});

}  // namespace cosnet::metrics
