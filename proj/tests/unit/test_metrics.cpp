#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cosnet/corpus/tokenize.hpp"
#include "cosnet/metrics/bleu.hpp"
#include "cosnet/metrics/chair.hpp"
#include "cosnet/metrics/cider.hpp"
#include "cosnet/metrics/report.hpp"
#include "cosnet/metrics/rouge.hpp"
#include "cosnet/numerics/random.hpp"

namespace cosnet::metrics {
namespace {

Caption words(const std::string& s) { return corpus::tokenize(s); }

Caption random_caption(Rng& rng, std::size_t vocab, std::size_t min_len, std::size_t max_len) {
  static const char* kWords[] = {"a", "dog", "cat", "red", "runs", "on", "the", "mat", "tree", "blue"};
  Caption c(min_len + rng.below(max_len - min_len + 1));
  for (auto& w : c) w = kWords[rng.below(std::min<std::size_t>(vocab, 10))];
  return c;
}

TEST(Bleu, IdenticalIsOneDisjointIsZero) {
  const auto c = words("a red dog runs on the mat");
  EXPECT_DOUBLE_EQ(bleu(c, {c}, 4), 1.0);
  EXPECT_EQ(bleu(c, {words("blue cat sleeps")}, 1), 0.0);
  EXPECT_THROW(bleu(Caption{}, {c}, 4), ContractError);
  EXPECT_THROW(bleu(c, {}, 4), ContractError);
  EXPECT_THROW(bleu(c, {c}, 0), ContractError);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  // Candidate of 3 tokens, references of 5 and 8: r = 5, all unigrams match.
  const auto c = words("a red dog");
  const double want = std::exp(1.0 - 5.0 / 3.0);
  EXPECT_NEAR(bleu(c, {words("a red dog runs fast"), words("a red dog runs on the long mat")}, 1), want, 1e-12);
  const auto s = bleu_stats(c, {words("x x x x"), words("x x")}, 1);
  EXPECT_EQ(s.reference_length, 2u);  // |4-3| = |2-3|, shorter wins
}

TEST(Bleu, CorpusLevelSumsCountsBeforeTheMean) {
  const std::vector<Caption> cands = {words("a dog"), words("the red cat sat")};
  const std::vector<std::vector<Caption>> refs = {{words("a dog")}, {words("the blue cat sat")}};
  // Unigrams: 2/2 + 3/4; bigrams: 1/1 + 1/3.
  const double p1 = 5.0 / 6.0, p2 = 2.0 / 4.0;
  EXPECT_NEAR(corpus_bleu(cands, refs, 2), std::sqrt(p1 * p2), 1e-12);
}

TEST(Bleu, BoundedAndMonotoneInReferences) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_caption(rng, 6, 1, 8);
    std::vector<Caption> refs = {random_caption(rng, 6, 1, 8)};
    const auto extra = random_caption(rng, 6, refs[0].size(), refs[0].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const double before = bleu(c, refs, n);
      EXPECT_GE(before, 0.0);
      EXPECT_LE(before, 1.0);
      // Same length, so the brevity penalty is unchanged; clipping can only loosen.
      auto more = refs;
      more.push_back(extra);
      EXPECT_GE(bleu(c, more, n) + 1e-12, before);
    }
  }
}

std::size_t lcs_oracle(const Caption& a, const Caption& b) {
  // Exhaustive over subsequences of the shorter side.
  const Caption& s = a.size() <= b.size() ? a : b;
  const Caption& l = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < s.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < l.size() && l[j] != s[i]) ++j;
      if (j == l.size()) ok = false;
      else { ++j; ++len; }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

TEST(Rouge, LcsMatchesExhaustiveSearch) {
  Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    const auto a = random_caption(rng, 4, 0, 9), b = random_caption(rng, 4, 0, 9);
    EXPECT_EQ(lcs_length(a, b), lcs_oracle(a, b));
  }
}

TEST(Rouge, FMeasureFormula) {
  const auto c = words("a dog on a mat"), r = words("a red dog sat on the mat");
  const double lcs = 4.0, p = lcs / 5.0, rc = lcs / 7.0;
  EXPECT_NEAR(rouge_l(c, {r}), (1 + 1.2) * p * rc / (rc + 1.2 * p), 1e-12);
  EXPECT_EQ(rouge_l(c, {words("blue cat")}), 0.0);
  EXPECT_NEAR(rouge_l(c, {words("blue cat"), c}), 1.0, 1e-12);
}

TEST(Cider, DisjointScoresZero) {
  const std::vector<std::vector<Caption>> refs = {{words("a red dog")}, {words("a blue cat")}};
  const auto s = cider_scores({words("green tree"), words("yellow car")}, refs);
  EXPECT_EQ(s, (std::vector<double>{0.0, 0.0}));
}

TEST(Cider, DocumentFrequencyAndIdf) {
  const CiderCorpus corpus({{words("a dog"), words("a dog runs")}, {words("a cat")}, {words("red")}}, 2);
  EXPECT_EQ(corpus.images(), 3u);
  EXPECT_EQ(corpus.document_frequency({"a"}), 2u);
  EXPECT_EQ(corpus.document_frequency({"a", "dog"}), 1u);
  EXPECT_NEAR(corpus.idf({"a"}), std::log(3.0) - std::log(2.0), 1e-12);
  EXPECT_NEAR(corpus.idf({"zebra"}), std::log(3.0), 1e-12);
}

TEST(Cider, CorpusMeanIsOrderInvariant) {
  Rng rng(13);
  std::vector<Caption> cands;
  std::vector<std::vector<Caption>> refs;
  for (int i = 0; i < 40; ++i) {
    cands.push_back(random_caption(rng, 10, 2, 8));
    refs.push_back({random_caption(rng, 10, 2, 8), random_caption(rng, 10, 2, 8)});
  }
  const double base = cider(cands, refs);
  EXPECT_GT(base, 0.0);
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(order);
    std::vector<Caption> c2;
    std::vector<std::vector<Caption>> r2;
    for (auto i : order) {
      c2.push_back(cands[i]);
      r2.push_back(refs[i]);
    }
    EXPECT_NEAR(cider(c2, r2), base, 1e-9);
  }
  EXPECT_THROW(cider({}, {}), ContractError);
}

corpus::ObjectLexicon lexicon() {
  corpus::ObjectLexicon lex;
  lex.add("dog", "dog");
  lex.add("puppy", "dog");
  lex.add("cat", "cat");
  lex.add("hot dog", "hotdog");
  lex.add("traffic light", "light");
  return lex;
}

// Double loop over positions and forms, longest form first.
std::pair<std::size_t, std::size_t> chair_oracle(const Caption& c, const std::set<std::string>& gt) {
  const std::vector<std::pair<Caption, std::string>> forms = {
      {{"hot", "dog"}, "hotdog"}, {{"traffic", "light"}, "light"}, {{"dog"}, "dog"}, {{"puppy"}, "dog"},
      {{"cat"}, "cat"}};
  std::size_t mentions = 0, bad = 0;
  for (std::size_t i = 0; i < c.size();) {
    std::size_t step = 1;
    for (const auto& [f, canon] : forms) {
      if (i + f.size() > c.size() || !std::equal(f.begin(), f.end(), c.begin() + static_cast<std::ptrdiff_t>(i)))
        continue;
      ++mentions;
      if (!gt.contains(canon)) ++bad;
      step = f.size();
      break;
    }
    i += step;
  }
  return {mentions, bad};
}

TEST(Chair, MatchesDoubleLoopOracle) {
  Rng rng(14);
  const std::vector<std::string> vocab = {"a", "hot", "dog", "puppy", "cat", "traffic", "light", "near"};
  const std::vector<std::string> objects = {"dog", "cat", "hotdog", "light"};
  std::vector<Caption> caps;
  std::vector<std::set<std::string>> gts;
  std::size_t mentions = 0, bad = 0, bad_sentences = 0;
  for (int t = 0; t < 200; ++t) {
    Caption c(1 + rng.below(8));
    for (auto& w : c) w = vocab[rng.below(vocab.size())];
    std::set<std::string> gt;
    for (const auto& o : objects)
      if (rng.below(2)) gt.insert(o);
    const auto [m, b] = chair_oracle(c, gt);
    mentions += m;
    bad += b;
    bad_sentences += b > 0;
    caps.push_back(c);
    gts.push_back(gt);
  }
  const auto r = chair(caps, gts, lexicon());
  EXPECT_EQ(r.mentions, mentions);
  EXPECT_EQ(r.hallucinated_mentions, bad);
  EXPECT_EQ(r.hallucinated_sentences, bad_sentences);
  EXPECT_NEAR(r.chair_i, static_cast<double>(bad) / static_cast<double>(mentions), 1e-12);
  EXPECT_NEAR(r.chair_s, static_cast<double>(bad_sentences) / 200.0, 1e-12);
}

TEST(Chair, MultiwordFormsWin) {
  const auto r = chair({words("a hot dog near a puppy")}, {{"hotdog"}}, lexicon());
  EXPECT_EQ(r.mentions, 2u);
  EXPECT_EQ(r.hallucinated_mentions, 1u);
  ASSERT_EQ(r.hallucinated.size(), 1u);
  EXPECT_EQ(r.hallucinated[0], std::vector<std::string>{"dog"});
}

TEST(Report, TextHasOneLinePerMetric) {
  const std::vector<Caption> c = {words("a dog near a cat")};
  const std::vector<std::vector<Caption>> refs = {{words("a dog near a cat")}};
  const auto r = evaluate(c, refs, {{"dog", "cat"}}, lexicon());
  EXPECT_EQ(r.images, 1u);
  const auto text = report_text(r);
  for (const char* key : {"BLEU@1 1.0000", "BLEU@4 1.0000", "ROUGE-L 1.0000", "CIDEr 10.0000", "CHs 0.0000",
                          "CHi 0.0000"})
    EXPECT_NE(text.find(key), std::string::npos) << key << "\n" << text;
  EXPECT_NE(report_json(r).find("\"images\""), std::string::npos);
}

}  // namespace
}  // namespace cosnet::metrics
