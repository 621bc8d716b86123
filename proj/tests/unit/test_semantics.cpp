#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cosnet/numerics/gradcheck.hpp"
#include "cosnet/numerics/ops.hpp"
#include "cosnet/semantics/comprehender.hpp"
#include "cosnet/semantics/ranker.hpp"
#include "cosnet/semantics/semantic_head.hpp"
#include "cosnet/semantics/visual_encoder.hpp"
#include "fixtures.hpp"

namespace cosnet::semantics {
namespace {

using testing::random_tensor;

struct Stack {
  ParameterStore<double> store;
  VisualEncoderParams<double> visual;
  ComprehenderParams<double> comprehender;
  SemanticHeadParams<double> head;

  Stack() {
    Rng rng(3);
    visual = make_visual_encoder(store, "v", 6, 8, 2, 2, rng);
    comprehender = make_comprehender(store, "c", 8, 2, 1, 3, 5, rng);
    head = make_semantic_head(store, "h", 8, 5, rng);
  }
};

TEST(VisualEncoder, HolisticGlobalFoldsEveryLayer) {
  Stack s;
  Rng rng(1);
  Graph<double> g;
  const auto projected = project_visual_inputs(s.visual, g.constant(random_tensor<double>({6}, rng)),
                                               g.constant(random_tensor<double>({4, 6}, rng)));
  EXPECT_EQ(projected.shape(), (Shape{5, 8}));
  const auto enc = encode_visual(s.visual, projected);
  EXPECT_EQ(enc.tokens.shape(), (Shape{5, 8}));
  ASSERT_EQ(enc.layer_globals.size(), 3u);  // input row plus one per block

  // Independent fold: [v^(0), v^(1), v^(2)] W_c.
  std::vector<double> cat;
  for (const auto& v : enc.layer_globals) cat.insert(cat.end(), v.value().values().begin(), v.value().values().end());
  const auto& wc = s.visual.combine->value;
  ASSERT_EQ(wc.shape(), (Shape{24, 8}));
  for (std::size_t j = 0; j < 8; ++j) {
    double want = 0.0;
    for (std::size_t k = 0; k < 24; ++k) want += cat[k] * wc(k, j);
    EXPECT_NEAR(enc.holistic_global.value()[j], want, 1e-12);
    EXPECT_NEAR(enc.tokens.value()(0, j), want, 1e-12);
  }
}

TEST(VisualEncoder, RejectsWrongFeatureWidth) {
  Stack s;
  Graph<double> g;
  EXPECT_THROW(project_visual_inputs(s.visual, g.constant(Tensor<double>({5})), g.constant(Tensor<double>({4, 6}))),
               ShapeError);
}

TEST(Comprehender, SlotsThenCuesAndCueValidation) {
  Stack s;
  Rng rng(2);
  Graph<double> g;
  const auto visual = g.constant(random_tensor<double>({5, 8}, rng));
  const std::vector<std::size_t> cues = {0, 3};
  const auto tokens = comprehend(s.comprehender, cues, visual);
  EXPECT_EQ(tokens.tokens.shape(), (Shape{5, 8}));
  EXPECT_EQ(tokens.slot_count, 3u);
  EXPECT_EQ(tokens.cue_count(), 2u);
  const std::vector<std::size_t> irrelevant = {4};
  EXPECT_THROW(comprehend(s.comprehender, irrelevant, visual), ContractError);
  const auto no_cues = comprehend(s.comprehender, std::span<const std::size_t>(), visual);
  EXPECT_EQ(no_cues.tokens.rows(), 3u);
}

TEST(Comprehender, CueOrderOnlyPermutesCueRows) {
  // No positional information: swapping cues swaps their output rows and
  // leaves the slots untouched.
  Stack s;
  Rng rng(4);
  Graph<double> g;
  const auto visual = g.constant(random_tensor<double>({5, 8}, rng));
  const std::vector<std::size_t> ab = {1, 2}, ba = {2, 1};
  const auto x = comprehend(s.comprehender, ab, visual).tokens.value();
  const auto y = comprehend(s.comprehender, ba, visual).tokens.value();
  for (std::size_t d = 0; d < 8; ++d) {
    for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(x(r, d), y(r, d), 1e-12);
    EXPECT_NEAR(x(3, d), y(4, d), 1e-12);
    EXPECT_NEAR(x(4, d), y(3, d), 1e-12);
  }
}

TEST(SemanticHead, DistributionsAndMaxPool) {
  Stack s;
  Rng rng(5);
  Graph<double> g;
  const auto visual = g.constant(random_tensor<double>({5, 8}, rng));
  const std::vector<std::size_t> cues = {0, 1, 3};
  const auto tokens = comprehend(s.comprehender, cues, visual);
  const auto pred = predict_semantics(s.head, tokens);
  const auto& lp = pred.cue_log_probs.value();
  ASSERT_EQ(lp.shape(), (Shape{3, 5}));
  for (std::size_t r = 0; r < 3; ++r) {
    double z = 0.0;
    for (double v : lp.row(r)) z += std::exp(v);
    EXPECT_NEAR(z, 1.0, 1e-12);
  }
  const auto& sp = pred.slot_probs.value();
  ASSERT_EQ(sp.shape(), (Shape{3, 5}));
  for (std::size_t c = 0; c < 5; ++c) {
    double mx = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
      EXPECT_GT(sp(r, c), 0.0);
      EXPECT_LT(sp(r, c), 1.0);
      mx = std::max(mx, sp(r, c));
    }
    EXPECT_EQ(pred.pooled.value()[c], mx);
  }
  const auto none = predict_semantics(s.head, comprehend(s.comprehender, std::span<const std::size_t>(), visual));
  EXPECT_FALSE(none.cue_log_probs.valid());
}

TEST(Labels, CueAndMissingTargets) {
  const std::vector<std::size_t> cues = {2, 5, 7};
  const std::set<std::size_t> gt = {1, 5, 7, 8};
  EXPECT_EQ(make_cue_labels(cues, gt, 10), (std::vector<std::size_t>{10, 5, 7}));
  const auto m = make_missing_labels(gt, cues, 11);
  ASSERT_EQ(m.size(), 11u);
  for (std::size_t c = 0; c < 11; ++c) EXPECT_EQ(m[c], (c == 1 || c == 8) ? 1 : 0) << c;
}

TEST(Losses, FilterLossIsMeanNegativeLogLikelihood) {
  Graph<double> g;
  const auto lp = log_softmax(g.constant(Tensor<double>::matrix({{0.0, 1.0, 2.0}, {3.0, 0.0, 0.0}})));
  const std::vector<std::size_t> labels = {2, 1};
  const double z0 = std::log(1 + std::exp(1.0) + std::exp(2.0)), z1 = std::log(std::exp(3.0) + 2);
  EXPECT_NEAR(loss_filter(g, lp, labels).value().item(), ((z0 - 2.0) + z1) / 2.0, 1e-12);
  EXPECT_EQ(loss_filter(g, Var<double>(), std::span<const std::size_t>()).value().item(), 0.0);
}

// Independent scalar form of the asymmetric loss.
double asl_oracle(const std::vector<double>& p, const std::vector<std::uint8_t>& y, const AsymmetricLossConfig& c) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i]) {
      total -= std::pow(1.0 - p[i], c.gamma_positive) * std::log(std::max(p[i], 1e-8));
    } else {
      const double pm = std::max(p[i] - c.margin, 0.0);
      total -= std::pow(pm, c.gamma_negative) * std::log(std::max(1.0 - pm, 1e-8));
    }
  }
  return total;
}

TEST(Losses, AsymmetricLossMatchesScalarOracle) {
  Rng rng(6);
  for (const AsymmetricLossConfig cfg : {AsymmetricLossConfig{0, 4, 0.05}, AsymmetricLossConfig{1, 2, 0.2},
                                         AsymmetricLossConfig{0, 0, 0}}) {
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 1 + rng.below(12);
      std::vector<double> p(n);
      std::vector<std::uint8_t> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = rng.uniform(0.001, 0.999);
        y[i] = static_cast<std::uint8_t>(rng.below(2));
      }
      Graph<double> g;
      const double got = loss_missing(g.constant(Tensor<double>({1, n}, p)), y, cfg).value().item();
      EXPECT_NEAR(got, asl_oracle(p, y, cfg), 1e-10);
    }
  }
}

TEST(Losses, AsymmetricLossGradient) {
  const std::vector<std::uint8_t> y = {1, 0, 0, 1, 0};
  for (const AsymmetricLossConfig cfg : {AsymmetricLossConfig{0, 4, 0.05}, AsymmetricLossConfig{1, 2, 0.1}}) {
    const std::function<Var<double>(Graph<double>&, Var<double>)> f = [&](Graph<double>&, Var<double> x) {
      return loss_missing(sigmoid(x), y, cfg);
    };
    // Logits away from the margin kink.
    const auto r = finite_diff_check(f, Tensor<double>::matrix({{0.3, 1.2, -0.4, -1.5, 2.0}}), 1e-6);
    EXPECT_LT(r.max_rel_error, 1e-6);
  }
}

TEST(Losses, AsymmetricLossIgnoresEasyNegativesBelowMargin) {
  Graph<double> g;
  const std::vector<std::uint8_t> y = {0, 0};
  const auto v = loss_missing(g.constant(Tensor<double>::matrix({{0.01, 0.04}})), y, {0, 4, 0.05});
  EXPECT_EQ(v.value().item(), 0.0);
}

TEST(Ranker, GradientCheck) {
  Rng rng(7);
  ParameterStore<double> store;
  const auto r = make_ranker(store, "r", 5, 4, rng);
  const auto x = random_tensor<double>({3, 4}, rng);
  const auto w = random_tensor<double>({3, 4}, rng);
  const auto checks = check_parameters<double>(store, [&](Graph<double>& g) {
    return sum(mul(rank_semantics(r, g.constant(x)).tokens, g.constant(w)));
  }, 1e-5);
  EXPECT_LT(checks.front().result.max_rel_error, 1e-6);
  const std::function<Var<double>(Graph<double>&, Var<double>)> f = [&](Graph<double>& g, Var<double> v) {
    return sum(mul(rank_semantics(r, v).tokens, g.constant(w)));
  };
  EXPECT_LT(finite_diff_check(f, x, 1e-5).max_rel_error, 1e-6);
}

TEST(FullStack, ComprehenderAndHeadGradients) {
  Stack s;
  Rng rng(8);
  for (auto& p : s.store)
    for (auto& v : p.value.values()) v += 0.1 * rng.normal();
  const auto global = random_tensor<double>({6}, rng);
  const auto grid = random_tensor<double>({4, 6}, rng);
  const std::vector<std::size_t> cues = {0, 2};
  const std::set<std::size_t> gt = {2, 3};
  const auto checks = check_parameters<double>(s.store, [&](Graph<double>& g) {
    const auto enc = encode_visual(s.visual, project_visual_inputs(s.visual, g.constant(global), g.constant(grid)));
    const auto tokens = comprehend(s.comprehender, cues, enc.tokens);
    const auto pred = predict_semantics(s.head, tokens);
    const auto labels = make_cue_labels(cues, gt, 4);
    return add(loss_filter(g, pred.cue_log_probs, labels),
               loss_missing(pred.pooled, make_missing_labels(gt, cues, 5), {1, 2, 0.05}));
  }, 1e-5);
  for (const auto& c : checks) EXPECT_LT(c.result.max_rel_error, 1e-4) << c.name;
}

}  // namespace
}  // namespace cosnet::semantics
