#include "cosnet/semantics/semantic_head.hpp"

#include <algorithm>
#include <cmath>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::semantics {

template <std::floating_point T>
SemanticHeadParams<T> make_semantic_head(ParameterStore<T>& store, const std::string& prefix,
                                         std::size_t model_dim, std::size_t semantic_vocab_size, Rng& rng) {
  SemanticHeadParams<T> p;
  p.weight = &store.create(prefix + ".weight", {model_dim, semantic_vocab_size});
  p.bias = &store.create(prefix + ".bias", {semantic_vocab_size});
  xavier_uniform(*p.weight, rng);
  return p;
}

template <std::floating_point T>
SemanticPredictions<T> predict_semantics(const SemanticHeadParams<T>& head, const SemanticTokens<T>& tokens) {
  Graph<T>& g = tokens.tokens.graph();
  Var<T> logits = add_row(matmul(tokens.tokens, g.param(*head.weight)), g.param(*head.bias));
  SemanticPredictions<T> out;
  out.slot_probs = sigmoid(slice_rows(logits, 0, tokens.slot_count));
  out.pooled = max_over_rows(out.slot_probs);
  if (tokens.cue_count() > 0) {
    out.cue_log_probs = log_softmax(slice_rows(logits, tokens.slot_count, tokens.cue_count()));
  }
  return out;
}

std::vector<std::size_t> make_cue_labels(std::span<const std::size_t> cue_indices,
                                         const std::set<std::size_t>& ground_truth, std::size_t irrelevant) {
  std::vector<std::size_t> labels;
  labels.reserve(cue_indices.size());
  for (std::size_t c : cue_indices) labels.push_back(ground_truth.contains(c) ? c : irrelevant);
  return labels;
}

std::vector<std::uint8_t> make_missing_labels(const std::set<std::size_t>& ground_truth,
                                              std::span<const std::size_t> cue_indices,
                                              std::size_t semantic_vocab_size) {
  std::vector<std::uint8_t> y(semantic_vocab_size, 0);
  for (std::size_t c : ground_truth) {
    if (c + 1 < semantic_vocab_size) y[c] = 1;
  }
  for (std::size_t c : cue_indices) {
    if (c < semantic_vocab_size) y[c] = 0;
  }
  return y;
}

template <std::floating_point T>
Var<T> loss_filter(Graph<T>& graph, Var<T> cue_log_probs, std::span<const std::size_t> labels) {
  if (labels.empty()) return graph.constant(Tensor<T>::scalar(0));
  if (cue_log_probs.rows() != labels.size()) {
    throw ShapeError("loss_filter: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(cue_log_probs.rows()) + " cue rows");
  }
  return scale(mean(pick(cue_log_probs, labels)), T(-1));
}

namespace {

constexpr double kLogFloor = 1e-8;

struct AslTerm {
  double loss;
  double dloss_dp;
};

AslTerm asl_positive(double p, double gamma) {
  const double q = std::max(p, kLogFloor);
  const double logq = std::log(q);
  const double dlog = p > kLogFloor ? 1.0 / p : 0.0;
  if (gamma == 0.0) return {-logq, -dlog};
  const double w = std::pow(1.0 - p, gamma);
  const double dw = -gamma * std::pow(1.0 - p, gamma - 1.0);
  return {-w * logq, -(dw * logq + w * dlog)};
}

AslTerm asl_negative(double p, double gamma, double margin) {
  const double pm = std::max(p - margin, 0.0);
  const double active = p > margin ? 1.0 : 0.0;
  const double r = std::max(1.0 - pm, kLogFloor);
  const double logr = std::log(r);
  const double dlog = (1.0 - pm) > kLogFloor ? -1.0 / (1.0 - pm) : 0.0;  // d log(1 - pm) / d pm
  if (gamma == 0.0) return {-logr, -dlog * active};
  const double w = std::pow(pm, gamma);
  const double dw = pm > 0.0 ? gamma * std::pow(pm, gamma - 1.0) : 0.0;
  return {-w * logr, -(dw * logr + w * dlog) * active};
}

}  // namespace

template <std::floating_point T>
Var<T> loss_missing(Var<T> pooled, std::span<const std::uint8_t> targets, const AsymmetricLossConfig& config) {
  const Tensor<T>& p = pooled.value();
  if (p.size() != targets.size()) {
    throw ShapeError("loss_missing: " + std::to_string(targets.size()) + " targets for " + std::to_string(p.size()) +
                     " probabilities");
  }
  Tensor<T> dp(p.shape());
  double total = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double pc = static_cast<double>(p[c]);
    const AslTerm t = targets[c] ? asl_positive(pc, config.gamma_positive)
                                 : asl_negative(pc, config.gamma_negative, config.margin);
    total += t.loss;
    dp[c] = static_cast<T>(t.dloss_dp);
  }
  Graph<T>& g = pooled.graph();
  const std::size_t in = pooled.id();
  return g.record(Tensor<T>::scalar(static_cast<T>(total)), {in}, "asymmetric_loss",
                  [in, dp = std::move(dp)](Graph<T>& graph, std::size_t self) {
                    const T upstream = graph.grad(self)[0];
                    Tensor<T>& gin = graph.grad(in);
                    for (std::size_t c = 0; c < dp.size(); ++c) gin[c] += upstream * dp[c];
                  });
}

#define COSNET_INSTANTIATE(T)                                                                              \
  template SemanticHeadParams<T> make_semantic_head(ParameterStore<T>&, const std::string&, std::size_t,   \
                                                    std::size_t, Rng&);                                    \
  template SemanticPredictions<T> predict_semantics(const SemanticHeadParams<T>&, const SemanticTokens<T>&); \
  template Var<T> loss_filter(Graph<T>&, Var<T>, std::span<const std::size_t>);                            \
  template Var<T> loss_missing(Var<T>, std::span<const std::uint8_t>, const AsymmetricLossConfig&);
COSNET_INSTANTIATE(float)
COSNET_INSTANTIATE(double)
#undef COSNET_INSTANTIATE

}  // namespace cosnet::semantics
