#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cosnet/semantics/comprehender.hpp"

namespace cosnet::semantics {

/// One affine map shared by slot and cue tokens: D -> N_c + 1 logits.
template <std::floating_point T>
struct SemanticHeadParams {
  Parameter<T>* weight = nullptr;
  Parameter<T>* bias = nullptr;
};

template <std::floating_point T>
SemanticHeadParams<T> make_semantic_head(ParameterStore<T>& store, const std::string& prefix,
                                         std::size_t model_dim, std::size_t semantic_vocab_size, Rng& rng);

template <std::floating_point T>
struct SemanticPredictions {
  Var<T> cue_log_probs;  // N_r x (N_c + 1) log-softmax rows; invalid when N_r = 0
  Var<T> slot_probs;     // N_o x (N_c + 1) sigmoid entries
  Var<T> pooled;         // P~_o, 1 x (N_c + 1)
};

template <std::floating_point T>
SemanticPredictions<T> predict_semantics(const SemanticHeadParams<T>& head, const SemanticTokens<T>& tokens);

/// y_i = cue index when the cue is a ground-truth word, else `irrelevant`.
std::vector<std::size_t> make_cue_labels(std::span<const std::size_t> cue_indices,
                                         const std::set<std::size_t>& ground_truth, std::size_t irrelevant);

/// y_m[c] = 1 iff c is a ground-truth word not among the cues. The
/// irrelevant coordinate stays 0.
std::vector<std::uint8_t> make_missing_labels(const std::set<std::size_t>& ground_truth,
                                              std::span<const std::size_t> cue_indices,
                                              std::size_t semantic_vocab_size);

/// -(1/N_r) sum_i log P_si[y_i] from log-probabilities; 0 when N_r = 0.
template <std::floating_point T>
Var<T> loss_filter(Graph<T>& graph, Var<T> cue_log_probs, std::span<const std::size_t> labels);

struct AsymmetricLossConfig {
  double gamma_positive = 0.0;
  double gamma_negative = 4.0;
  double margin = 0.05;
};

/// Asymmetric multi-label loss summed over classes:
///   positives  -(1 - p)^g+ log p
///   negatives  -(p_m)^g- log(1 - p_m),  p_m = max(p - m, 0)
/// Logs are clamped at 1e-8.
template <std::floating_point T>
Var<T> loss_missing(Var<T> pooled, std::span<const std::uint8_t> targets, const AsymmetricLossConfig& config);

}  // namespace cosnet::semantics
