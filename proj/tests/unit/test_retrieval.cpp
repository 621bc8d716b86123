#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cosnet/corpus/generator.hpp"
#include "cosnet/retrieval/embedding.hpp"
#include "cosnet/retrieval/semantic_vocab.hpp"
#include "cosnet/retrieval/sentence_pool.hpp"
#include "fixtures.hpp"

namespace cosnet::retrieval {
namespace {

using corpus::Caption;

EmbeddingVector unit(std::vector<float> v) {
  normalize_in_place(v);
  return {v, EmbeddingSource::sentence};
}

TEST(Embedding, SentencesAreDeterministicUnitVectors) {
  const EmbeddingProvider a(32, 5), b(32, 5), c(32, 6);
  const Caption s = {"a", "red", "dog"};
  const auto ea = a.embed_sentence(s), eb = b.embed_sentence(s), ec = c.embed_sentence(s);
  EXPECT_EQ(ea.values, eb.values);
  EXPECT_NE(ea.values, ec.values);
  double n = 0.0;
  for (float v : ea.values) n += v * v;
  EXPECT_NEAR(n, 1.0, 1e-6);
}

TEST(Embedding, SharedWordsRaiseSimilarity) {
  const EmbeddingProvider p(64, 1);
  const auto base = p.embed_sentence(Caption{"red", "dog", "near", "tree"});
  const auto close = p.embed_sentence(Caption{"red", "dog", "near", "car"});
  const auto far = p.embed_sentence(Caption{"blue", "cat", "under", "car"});
  EXPECT_GT(cosine_similarity(base, close), cosine_similarity(base, far));
}

TEST(Embedding, PrecomputedImageEmbeddingPassesThrough) {
  corpus::CorpusRecord r;
  r.image_id = "x";
  r.grid_features = Tensor<float>({2, 3}, 1.0f);
  r.embedding = std::vector<float>{3.0f, 4.0f};
  const EmbeddingProvider p(2, 1);
  const auto e = p.embed_image(r);
  EXPECT_NEAR(e.values[0], 0.6f, 1e-6);
  EXPECT_NEAR(e.values[1], 0.8f, 1e-6);
  EXPECT_EQ(e.source, EmbeddingSource::image);
  r.embedding = std::vector<float>{1.0f, 2.0f, 3.0f};
  EXPECT_THROW(p.embed_image(r), ContractError);
}

TEST(Embedding, CosineRejectsZeroAndMismatch) {
  const std::vector<float> z = {0, 0}, a = {1, 0}, b = {1, 0, 0};
  EXPECT_THROW(cosine_similarity(std::span<const float>(z), std::span<const float>(a)), ContractError);
  EXPECT_THROW(cosine_similarity(std::span<const float>(a), std::span<const float>(b)), ShapeError);
  std::vector<float> zero = {0.0f, 0.0f};
  EXPECT_THROW(normalize_in_place(zero), ContractError);
}

TEST(Pool, TopKMatchesBruteForceWithIdTieBreak) {
  Rng rng(3);
  SentencePool pool;
  std::vector<EmbeddingVector> embs;
  for (std::uint64_t i = 0; i < 40; ++i) {
    // Every fifth entry duplicates its predecessor to force exact ties.
    if (i % 5 == 4) {
      embs.push_back(embs.back());
    } else {
      std::vector<float> v(6);
      for (auto& x : v) x = static_cast<float>(rng.normal());
      embs.push_back(unit(v));
    }
    pool.add({100 - i, "img" + std::to_string(i % 8), {"w"}, embs.back()});
  }
  std::vector<float> qv(6);
  for (auto& x : qv) x = static_cast<float>(rng.normal());
  const auto q = unit(qv);

  std::vector<std::pair<double, std::uint64_t>> all;
  for (const auto& e : pool.entries()) {
    if (e.owner == "img3") continue;
    all.emplace_back(cosine_similarity(q, e.embedding), e.sentence_id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const auto got = retrieve_top_k(q, pool, 7, std::string_view("img3"));
  ASSERT_EQ(got.sentence_ids.size(), 7u);
  EXPECT_FALSE(got.shortfall);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(got.sentence_ids[i], all[i].second);
    EXPECT_NEAR(got.similarities[i], all[i].first, 1e-12);
  }
}

TEST(Pool, ShortfallWhenTooFewEntries) {
  SentencePool pool;
  pool.add({1, "a", {"x"}, unit({1, 0})});
  pool.add({2, "b", {"y"}, unit({0, 1})});
  const auto r = retrieve_top_k(unit({1, 1}), pool, 5, std::string_view("a"));
  EXPECT_TRUE(r.shortfall);
  EXPECT_EQ(r.sentence_ids, std::vector<std::uint64_t>{2});
  EXPECT_THROW(retrieve_top_k(unit({1, 1}), pool, 0), ContractError);
  EXPECT_THROW(pool.add({2, "c", {"z"}, unit({1, 0})}), DataError);
}

TEST(Pool, SaveLoadRoundTrip) {
  testing::TempDir dir("pool");
  corpus::GeneratorConfig gc;
  gc.images = 5;
  gc.feature_dim = 4;
  gc.embedding_dim = 8;
  const auto records = corpus::generate_corpus(gc);
  const EmbeddingProvider p(8, 2);
  const auto pool = SentencePool::build(records, p);
  EXPECT_EQ(pool.size(), 25u);
  pool.save(dir.path() / "pool.jsonl");
  const auto back = SentencePool::load(dir.path() / "pool.jsonl");
  ASSERT_EQ(back.size(), pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_EQ(back.entry(i).sentence_id, pool.entry(i).sentence_id);
    EXPECT_EQ(back.entry(i).owner, pool.entry(i).owner);
    EXPECT_EQ(back.entry(i).tokens, pool.entry(i).tokens);
    EXPECT_EQ(back.entry(i).embedding.values, pool.entry(i).embedding.values);
  }
}

TEST(SemanticVocab, FrequencyRankedWithoutStopWords) {
  const std::vector<Caption> caps = {{"a", "dog", "and", "a", "cat"}, {"the", "dog", "runs"}, {"dog", "cat", "bird"}};
  const auto vocab = build_semantic_vocab(caps, StopWords::english(), 10);
  // dog x3, cat x2, then bird/runs alphabetically.
  EXPECT_EQ(vocab.words(), (std::vector<std::string>{"dog", "cat", "bird", "runs"}));
  EXPECT_EQ(vocab.irrelevant_index(), 4u);
  EXPECT_EQ(vocab.classes(), 5u);
  EXPECT_TRUE(vocab.shortfall());
  EXPECT_EQ(vocab.word(4), SemanticVocabulary::kIrrelevantToken);
  EXPECT_FALSE(vocab.index_of("the").has_value());
  const auto small = build_semantic_vocab(caps, StopWords::english(), 2);
  EXPECT_EQ(small.size(), 2u);
  EXPECT_FALSE(small.shortfall());
}

TEST(SemanticVocab, RejectsDuplicatesAndReservedToken) {
  EXPECT_THROW(SemanticVocabulary({"a", "a"}), DataError);
  EXPECT_THROW(SemanticVocabulary({SemanticVocabulary::kIrrelevantToken}), DataError);
}

TEST(SemanticVocab, SaveLoadRoundTrip) {
  testing::TempDir dir("svocab");
  const SemanticVocabulary v({"dog", "cat", "red"});
  v.save(dir.path() / "v.txt");
  EXPECT_EQ(SemanticVocabulary::load(dir.path() / "v.txt").words(), v.words());
  StopWords sw({"the", "a"});
  sw.save(dir.path() / "s.txt");
  const auto back = StopWords::load(dir.path() / "s.txt");
  EXPECT_TRUE(back.contains("the"));
  EXPECT_EQ(back.size(), 2u);
}

TEST(Cues, RankOrderDeduplicatedAndCapped) {
  const SemanticVocabulary vocab({"dog", "cat", "red", "tree", "car"});
  const std::vector<Caption> ranked = {{"a", "red", "dog", "near", "a", "tree"}, {"a", "dog", "and", "a", "cat"},
                                       {"a", "car", "unknownword"}};
  const auto cues = extract_semantic_cues(ranked, StopWords::english(), vocab, 4);
  ASSERT_EQ(cues.size(), 4u);
  EXPECT_EQ(cues.indices(), (std::vector<std::size_t>{2, 0, 3, 1}));
  EXPECT_EQ(cues.cues[3].source_rank, 1u);
  const auto gt = ground_truth_semantic_words(ranked, StopWords::english(), vocab);
  EXPECT_EQ(std::set<std::size_t>(gt.begin(), gt.end()), (std::set<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(StopWordsList, EnglishBasics) {
  const auto sw = StopWords::english();
  for (const char* w : {"a", "an", "the", "and", "of"}) EXPECT_TRUE(sw.contains(w)) << w;
  for (const char* w : {"dog", "red", "near"}) EXPECT_FALSE(sw.contains(w)) << w;
}

}  // namespace
}  // namespace cosnet::retrieval
