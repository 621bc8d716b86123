#include "cosnet/retrieval/semantic_vocab.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_set>

#include "cosnet/corpus/io.hpp"
#include "cosnet/stopwords_asset.hpp"

namespace cosnet::retrieval {

StopWords StopWords::english() {
  std::unordered_set<std::string> words;
  std::istringstream in(detail::kEnglishStopWords);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) words.insert(line);
  }
  return StopWords(std::move(words));
}

StopWords StopWords::load(const std::filesystem::path& path) {
  std::unordered_set<std::string> words;
  for (auto& line : corpus::read_lines(path)) {
    if (!line.empty()) words.insert(line);
  }
  return StopWords(std::move(words));
}

void StopWords::save(const std::filesystem::path& path) const {
  std::vector<std::string> sorted(words_.begin(), words_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& w : sorted) out += w + "\n";
  corpus::write_file_atomic(path, out);
}

SemanticVocabulary::SemanticVocabulary(std::vector<std::string> words, std::size_t requested)
    : words_(std::move(words)), requested_(requested == 0 ? words_.size() : requested) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == kIrrelevantToken) throw DataError("semantic vocabulary may not contain the irrelevant token");
    if (!index_.emplace(words_[i], i).second) throw DataError("duplicate semantic word '" + words_[i] + "'");
  }
}

std::optional<std::size_t> SemanticVocabulary::index_of(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& SemanticVocabulary::word(std::size_t index) const {
  static const std::string irrelevant = kIrrelevantToken;
  if (index == words_.size()) return irrelevant;
  if (index > words_.size()) throw ContractError("semantic class index out of range");
  return words_[index];
}

void SemanticVocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& w : words_) out += w + "\n";
  corpus::write_file_atomic(path, out);
}

SemanticVocabulary SemanticVocabulary::load(const std::filesystem::path& path) {
  std::vector<std::string> words;
  for (auto& line : corpus::read_lines(path)) {
    if (!line.empty()) words.push_back(line);
  }
  return SemanticVocabulary(std::move(words));
}

SemanticVocabulary build_semantic_vocab(std::span<const corpus::Caption> captions, const StopWords& stopwords,
                                        std::size_t target_size) {
  if (captions.empty()) throw ContractError("build_semantic_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& caption : captions) {
    for (const auto& w : caption) {
      if (!stopwords.contains(w)) ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  for (std::size_t i = 0; i < ranked.size() && i < target_size; ++i) words.push_back(ranked[i].first);
  return SemanticVocabulary(std::move(words), target_size);
}

std::vector<std::size_t> SemanticCueSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(cues.size());
  for (const auto& c : cues) out.push_back(c.index);
  return out;
}

SemanticCueSet extract_semantic_cues(std::span<const corpus::Caption> ranked_sentences, const StopWords& stopwords,
                                     const SemanticVocabulary& vocab, std::size_t cap) {
  SemanticCueSet out;
  std::unordered_set<std::size_t> seen;
  for (std::size_t rank = 0; rank < ranked_sentences.size(); ++rank) {
    for (const auto& w : ranked_sentences[rank]) {
      if (out.size() >= cap) return out;
      if (stopwords.contains(w)) continue;
      const auto idx = vocab.index_of(w);
      if (!idx || !seen.insert(*idx).second) continue;
      out.cues.push_back(SemanticCue{w, *idx, rank});
    }
  }
  return out;
}

std::vector<std::size_t> ground_truth_semantic_words(std::span<const corpus::Caption> captions,
                                                     const StopWords& stopwords, const SemanticVocabulary& vocab) {
  std::vector<std::size_t> out;
  for (const auto& caption : captions) {
    for (const auto& w : caption) {
      if (stopwords.contains(w)) continue;
      if (auto idx = vocab.index_of(w)) out.push_back(*idx);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cosnet::retrieval
