#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cosnet/retrieval/embedding.hpp"

namespace cosnet::retrieval {

struct PoolEntry {
  std::uint64_t sentence_id = 0;
  std::string owner;  // image id the sentence annotates
  std::vector<std::string> tokens;
  EmbeddingVector embedding;
};

/// Training sentences with their embeddings; immutable once built.
class SentencePool {
 public:
  SentencePool() = default;

  /// Rejects duplicate sentence ids.
  void add(PoolEntry entry);
  const std::vector<PoolEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const PoolEntry& entry(std::size_t i) const { return entries_[i]; }
  /// Entry by sentence id (linear scan).
  const PoolEntry* find(std::uint64_t sentence_id) const;

  /// One pool entry per caption; ids are assigned in record/caption order.
  static SentencePool build(const std::vector<corpus::CorpusRecord>& records,
                            const EmbeddingProvider& provider);

  // Line-delimited JSON, one object per entry with fields in the order
  // sentence_id, owner, tokens, embedding.
  void save(const std::filesystem::path& path) const;
  static SentencePool load(const std::filesystem::path& path);

 private:
  std::vector<PoolEntry> entries_;
  std::unordered_set<std::uint64_t> ids_;
};

struct RetrievalResult {
  std::vector<std::uint64_t> sentence_ids;
  std::vector<double> similarities;
  /// Fewer than K entries were available after exclusion.
  bool shortfall = false;
};

/// Exhaustive cosine ranking: descending similarity, ties by ascending
/// sentence id. Entries owned by `exclude_owner` are skipped.
RetrievalResult retrieve_top_k(const EmbeddingVector& query, const SentencePool& pool, std::size_t k,
                               std::optional<std::string_view> exclude_owner = std::nullopt);

}  // namespace cosnet::retrieval
