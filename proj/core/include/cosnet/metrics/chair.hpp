#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "cosnet/corpus/lexicon.hpp"

namespace cosnet::metrics {

struct ChairReport {
  double chair_s = 0.0;  // sentences with >= 1 hallucinated object / sentences
  double chair_i = 0.0;  // hallucinated mentions / all object mentions
  std::size_t sentences = 0;
  std::size_t hallucinated_sentences = 0;
  std::size_t mentions = 0;
  std::size_t hallucinated_mentions = 0;
  std::vector<std::vector<std::string>> hallucinated;  // canonical objects per sentence
};

/// Every lexicon mention counts, repeats included; a mention is
/// hallucinated when its canonical object is missing from the image's set.
ChairReport chair(const std::vector<corpus::Caption>& captions, const std::vector<std::set<std::string>>& gt_objects,
                  const corpus::ObjectLexicon& lexicon);

}  // namespace cosnet::metrics
