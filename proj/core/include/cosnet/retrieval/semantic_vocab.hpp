#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::retrieval {

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// The compiled-in English list (same content as assets/stopwords_en.txt).
  static StopWords english();
  /// One lowercase word per line; blank lines ignored.
  static StopWords load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool contains(const std::string& word) const { return words_.contains(word); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// N_c semantic words plus the irrelevant token at index N_c.
class SemanticVocabulary {
 public:
  static constexpr const char* kIrrelevantToken = "<irrelevant>";

  SemanticVocabulary() = default;
  /// Rejects duplicates and the reserved irrelevant token.
  explicit SemanticVocabulary(std::vector<std::string> words, std::size_t requested = 0);

  std::size_t size() const noexcept { return words_.size(); }  // N_c
  std::size_t classes() const noexcept { return words_.size() + 1; }
  std::size_t irrelevant_index() const noexcept { return words_.size(); }
  /// Size asked for at construction; larger than size() when the corpus ran short.
  std::size_t requested() const noexcept { return requested_; }
  bool shortfall() const noexcept { return requested_ > words_.size(); }

  std::optional<std::size_t> index_of(const std::string& word) const;
  const std::string& word(std::size_t index) const;
  const std::vector<std::string>& words() const noexcept { return words_; }

  // One word per line in index order; the irrelevant token is implicit.
  void save(const std::filesystem::path& path) const;
  static SemanticVocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t requested_ = 0;
};

/// Frequency-ranked non-stop words, count descending then lexicographic.
SemanticVocabulary build_semantic_vocab(std::span<const corpus::Caption> captions,
                                        const StopWords& stopwords, std::size_t target_size);

struct SemanticCue {
  std::string word;
  std::size_t index = 0;        // position in the semantic vocabulary
  std::size_t source_rank = 0;  // rank of the retrieved sentence it came from
};

struct SemanticCueSet {
  std::vector<SemanticCue> cues;

  std::size_t size() const noexcept { return cues.size(); }
  bool empty() const noexcept { return cues.empty(); }
  std::vector<std::size_t> indices() const;
};

/// Scans sentences in rank order and words in sentence order, keeping
/// in-vocabulary non-stop words once each, up to `cap` cues.
SemanticCueSet extract_semantic_cues(std::span<const corpus::Caption> ranked_sentences,
                                     const StopWords& stopwords, const SemanticVocabulary& vocab,
                                     std::size_t cap);

/// Union over captions of in-vocabulary non-stop words, as vocabulary indices.
std::vector<std::size_t> ground_truth_semantic_words(std::span<const corpus::Caption> captions,
                                                     const StopWords& stopwords,
                                                     const SemanticVocabulary& vocab);

}  // namespace cosnet::retrieval
