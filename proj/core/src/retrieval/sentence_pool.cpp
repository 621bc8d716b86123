#include "cosnet/retrieval/sentence_pool.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "cosnet/corpus/io.hpp"

namespace cosnet::retrieval {

void SentencePool::add(PoolEntry entry) {
  if (!ids_.insert(entry.sentence_id).second) {
    throw DataError("duplicate sentence id " + std::to_string(entry.sentence_id) + " in sentence pool");
  }
  entries_.push_back(std::move(entry));
}

const PoolEntry* SentencePool::find(std::uint64_t sentence_id) const {
  for (const auto& e : entries_) {
    if (e.sentence_id == sentence_id) return &e;
  }
  return nullptr;
}

SentencePool SentencePool::build(const std::vector<corpus::CorpusRecord>& records,
                                 const EmbeddingProvider& provider) {
  SentencePool pool;
  std::uint64_t next = 0;
  for (const auto& r : records) {
    for (const auto& caption : r.captions) {
      if (caption.empty()) continue;
      pool.add(PoolEntry{next++, r.image_id, caption, provider.embed_sentence(caption)});
    }
  }
  return pool;
}

void SentencePool::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["sentence_id"] = e.sentence_id;
    j["owner"] = e.owner;
    j["tokens"] = e.tokens;
    std::vector<double> emb(e.embedding.values.begin(), e.embedding.values.end());
    j["embedding"] = emb;
    out << j.dump() << '\n';
  }
  corpus::write_file_atomic(path, out.str());
}

SentencePool SentencePool::load(const std::filesystem::path& path) {
  SentencePool pool;
  std::size_t line_no = 0;
  for (const auto& line : corpus::read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PoolEntry e;
      e.sentence_id = j.at("sentence_id").get<std::uint64_t>();
      e.owner = j.at("owner").get<std::string>();
      e.tokens = j.at("tokens").get<std::vector<std::string>>();
      const auto emb = j.at("embedding").get<std::vector<double>>();
      e.embedding.values.assign(emb.begin(), emb.end());
      e.embedding.source = EmbeddingSource::sentence;
      pool.add(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return pool;
}

RetrievalResult retrieve_top_k(const EmbeddingVector& query, const SentencePool& pool, std::size_t k,
                               std::optional<std::string_view> exclude_owner) {
  if (k == 0) throw ContractError("retrieve_top_k: K must be at least 1");
  struct Scored {
    double similarity;
    std::uint64_t id;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& e : pool.entries()) {
    if (exclude_owner && e.owner == *exclude_owner) continue;
    scored.push_back({cosine_similarity(query, e.embedding), e.sentence_id});
  }
  auto better = [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  };
  RetrievalResult result;
  const std::size_t take = std::min(k, scored.size());
  result.shortfall = take < k;
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  for (std::size_t i = 0; i < take; ++i) {
    result.sentence_ids.push_back(scored[i].id);
    result.similarities.push_back(scored[i].similarity);
  }
  return result;
}

}  // namespace cosnet::retrieval
