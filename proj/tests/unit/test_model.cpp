#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cosnet/corpus/generator.hpp"
#include "cosnet/model/cosnet.hpp"
#include "cosnet/model/training.hpp"
#include "cosnet/retrieval/semantic_vocab.hpp"
#include "cosnet/retrieval/sentence_pool.hpp"
#include "fixtures.hpp"

namespace cosnet::model {
namespace {

ModelConfig base_of(ModelConfig c) {
  c.use_retrieval = c.use_filter_loss = c.use_missing_loss = c.use_ranker = false;
  return c;
}

TrainingExample example(const ModelConfig& c, Rng& rng) {
  TrainingExample ex;
  ex.image = testing::random_image(c, rng, 4, 3);
  ex.captions = {{4, 5, 6}, {7, 8}};
  ex.semantic_words = {ex.image.cues[0], 4};
  return ex;
}

TEST(Config, ValidationNamesTheProblem) {
  auto c = testing::tiny_config(12, 6);
  EXPECT_NO_THROW(c.validate());
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = testing::tiny_config(3, 6);
  EXPECT_THROW(c.validate(), ConfigError);
  c = testing::tiny_config(12, 1);
  EXPECT_THROW(c.validate(), ConfigError);
  c = testing::tiny_config(12, 6);
  c.asl.margin = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Model, BaseVariantDropsTheSemanticBranch) {
  const auto full_cfg = testing::tiny_config(12, 6);
  const CosNetModel<double> full(full_cfg, 1), base(base_of(full_cfg), 1);
  auto has = [](const ParameterStore<double>& s, const std::string& needle) {
    for (const auto& p : s)
      if (p.name.find(needle) != std::string::npos) return true;
    return false;
  };
  for (const char* part : {"comprehender", "semantic_head", "ranker", "semantic_attn"}) {
    EXPECT_TRUE(has(full.parameters(), part)) << part;
    EXPECT_FALSE(has(base.parameters(), part)) << part;
  }
  EXPECT_TRUE(has(base.parameters(), "gate"));
  Rng rng(1);
  EXPECT_TRUE(base.cue_decisions(testing::random_image(full_cfg, rng, 4, 2)).empty());
}

TEST(Model, ParameterNamesAreUnique) {
  const CosNetModel<float> m(testing::tiny_config(12, 6), 2);
  std::set<std::string> names;
  for (const auto& p : m.parameters()) EXPECT_TRUE(names.insert(p.name).second) << p.name;
}

TEST(Model, SameSeedSameWeights) {
  const CosNetModel<float> a(testing::tiny_config(12, 6), 5), b(testing::tiny_config(12, 6), 5),
      c(testing::tiny_config(12, 6), 6);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.parameters().count(); ++i) {
    EXPECT_EQ(a.parameters().at(i).value, b.parameters().at(i).value);
    any_diff = any_diff || !(a.parameters().at(i).value == c.parameters().at(i).value);
  }
  EXPECT_TRUE(any_diff);
}

TEST(Model, LossTermsFollowTheFlags) {
  Rng rng(3);
  auto cfg = testing::tiny_config(12, 6);
  const auto ex = example(cfg, rng);
  {
    const CosNetModel<double> m(cfg, 1);
    Graph<double> g;
    const auto l = m.example_loss(g, ex);
    EXPECT_GT(l.filter.value().item(), 0.0);
    EXPECT_GT(l.missing.value().item(), 0.0);
    EXPECT_NEAR(l.total.value().item(),
                l.caption.value().item() + l.filter.value().item() + l.missing.value().item(), 1e-12);
  }
  cfg.use_filter_loss = false;
  cfg.use_missing_loss = false;
  {
    const CosNetModel<double> m(cfg, 1);
    Graph<double> g;
    const auto l = m.example_loss(g, ex);
    EXPECT_EQ(l.filter.value().item(), 0.0);
    EXPECT_EQ(l.missing.value().item(), 0.0);
    EXPECT_EQ(l.total.value().item(), l.caption.value().item());
  }
}

TEST(Model, CueIndicesIgnoredWithoutRetrieval) {
  Rng rng(4);
  auto cfg = testing::tiny_config(12, 6);
  cfg.use_retrieval = false;
  const CosNetModel<double> m(cfg, 1);
  auto img = testing::random_image(cfg, rng, 4, 3);
  auto other = img;
  other.cues = {0};
  const auto a = m.scorer(img)({{1, 4}});
  const auto b = m.scorer(other)({{1, 4}});
  EXPECT_EQ(a, b);
  EXPECT_TRUE(m.cue_decisions(img).empty());
}

TEST(Model, ScorerRowsAreLogDistributions) {
  Rng rng(5);
  const auto cfg = testing::tiny_config(12, 6);
  const CosNetModel<double> m(cfg, 1);
  const auto rows = m.scorer(testing::random_image(cfg, rng, 4, 2))({{1}, {1, 5, 6}});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 12u);
    double z = 0.0;
    for (double v : r) z += std::exp(v);
    EXPECT_NEAR(z, 1.0, 1e-12);
  }
}

TEST(Model, ScorerAgreesWithFullForward) {
  Rng rng(6);
  const auto cfg = testing::tiny_config(12, 6);
  const CosNetModel<double> m(cfg, 1);
  const auto img = testing::random_image(cfg, rng, 4, 2);
  const std::vector<std::size_t> seq = {1, 4, 9};
  Graph<double> g;
  const auto logits = m.logits(m.encode(g, img), {seq}).value();
  const auto lp = m.scorer(img)({seq})[0];
  double mx = -1e300, z = 0.0;
  for (std::size_t c = 0; c < 12; ++c) mx = std::max(mx, logits(2, c));
  for (std::size_t c = 0; c < 12; ++c) z += std::exp(logits(2, c) - mx);
  for (std::size_t c = 0; c < 12; ++c) EXPECT_NEAR(lp[c], logits(2, c) - mx - std::log(z), 1e-12);
}

TEST(Model, CaptionsRespectLengthAndBans) {
  Rng rng(7);
  auto cfg = testing::tiny_config(12, 6);
  cfg.max_length = 5;
  const CosNetModel<float> m(cfg, 9);
  for (int i = 0; i < 10; ++i) {
    const auto h = m.caption(testing::random_image(cfg, rng, 4, 2), 3);
    EXPECT_LE(h.tokens.size(), 5u);
    for (auto t : h.tokens) {
      EXPECT_NE(t, 0u);
      EXPECT_NE(t, 1u);
    }
    EXPECT_EQ(h.finished, !h.tokens.empty() && h.tokens.back() == 2u);
  }
}

TEST(Training, LossDecreasesOnATinyBatch) {
  Rng rng(8);
  const auto cfg = testing::tiny_config(12, 6);
  CosNetModel<float> m(cfg, 2);
  std::vector<TrainingExample> data = {example(cfg, rng), example(cfg, rng)};
  TrainerConfig tc;
  tc.batch_size = 2;
  tc.warmup = 5;
  tc.lr_factor = 2.0;
  Trainer t(m, tc);
  const double first = t.train_epoch(data).total;
  double last = first;
  for (int e = 0; e < 40; ++e) last = t.train_epoch(data).total;
  EXPECT_LT(last, 0.5 * first);
  EXPECT_EQ(t.step(), 41);
  EXPECT_EQ(t.epoch(), 41u);
}

TEST(Training, NonFiniteLossLeavesParametersUntouched) {
  Rng rng(9);
  const auto cfg = testing::tiny_config(12, 6);
  CosNetModel<float> m(cfg, 2);
  m.parameters().at(0).value[0] = std::numeric_limits<float>::quiet_NaN();
  std::vector<Tensor<float>> before;
  for (const auto& p : m.parameters()) before.push_back(p.value);
  Trainer t(m, TrainerConfig{});
  const auto ex = example(cfg, rng);
  const TrainingExample* batch[] = {&ex};
  EXPECT_THROW(t.train_step(batch), NumericalError);
  EXPECT_EQ(t.step(), 0);
  for (std::size_t i = 1; i < before.size(); ++i) EXPECT_EQ(m.parameters().at(i).value, before[i]);
}

TEST(Training, ShuffleIsSeeded) {
  Rng rng(10);
  const auto cfg = testing::tiny_config(12, 6);
  std::vector<TrainingExample> data;
  for (int i = 0; i < 5; ++i) data.push_back(example(cfg, rng));
  auto run = [&](std::uint64_t shuffle) {
    CosNetModel<float> m(cfg, 4);
    TrainerConfig tc;
    tc.batch_size = 2;
    tc.shuffle_seed = shuffle;
    Trainer t(m, tc);
    t.train_epoch(data);
    return m.parameters().at(0).value;
  };
  EXPECT_EQ(run(1), run(1));
  EXPECT_FALSE(run(1) == run(2));
}

TEST(Cues, RetrievalExcludesOwnCaptions) {
  corpus::GeneratorConfig gc;
  gc.images = 30;
  gc.feature_dim = 8;
  gc.embedding_dim = 16;
  const auto records = corpus::generate_corpus(gc);
  const retrieval::EmbeddingProvider embedder(16, 7);
  const auto pool = retrieval::SentencePool::build(records, embedder);
  const auto stop = retrieval::StopWords::english();
  std::vector<corpus::Caption> caps;
  for (const auto& r : records) caps.insert(caps.end(), r.captions.begin(), r.captions.end());
  const auto vocab = retrieval::build_semantic_vocab(caps, stop, 100);
  CueSource src{&pool, &embedder, &stop, &vocab, 5, 20};
  const auto cues = retrieve_cues(records[0], src, true);
  EXPECT_LE(cues.size(), 20u);
  EXPECT_FALSE(cues.empty());
  for (auto c : cues) EXPECT_LT(c, vocab.size());
  const auto q = embedder.embed_image(records[0]);
  const auto top = retrieval::retrieve_top_k(q, pool, 5, std::string_view(records[0].image_id));
  for (auto id : top.sentence_ids) EXPECT_NE(pool.find(id)->owner, records[0].image_id);

  corpus::WordVocabulary words(std::vector<std::string>{"a", "red"});
  const auto ex = make_training_example(records[0], words, &src);
  EXPECT_EQ(ex.image.cues, cues);
  EXPECT_EQ(ex.captions.size(), records[0].captions.size());
  const auto gt = retrieval::ground_truth_semantic_words(records[0].captions, stop, vocab);
  EXPECT_EQ(ex.semantic_words, std::set<std::size_t>(gt.begin(), gt.end()));
}

}  // namespace
}  // namespace cosnet::model
