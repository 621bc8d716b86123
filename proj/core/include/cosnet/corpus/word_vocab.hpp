#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::corpus {

/// Caption vocabulary with reserved specials at fixed indices.
class WordVocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kUnk = 3;
  static constexpr std::size_t kSpecialCount = 4;

  WordVocabulary();
  /// `words` excludes the specials.
  explicit WordVocabulary(std::vector<std::string> words);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t index_of(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const { return index_.contains(word); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }

  /// Word ids without BOS/EOS.
  std::vector<std::size_t> encode(const Caption& caption) const;
  /// Stops at EOS and drops PAD/BOS.
  Caption decode(std::span<const std::size_t> ids) const;

  // One token per line in index order, specials included.
  void save(const std::filesystem::path& path) const;
  static WordVocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps every word occurring at least `min_count` times; words ordered by
/// count descending, then lexicographically.
WordVocabulary build_word_vocab(std::span<const CorpusRecord> records, std::size_t min_count);

}  // namespace cosnet::corpus
