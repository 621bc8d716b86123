#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "cosnet/decoder/beam_search.hpp"
#include "cosnet/decoder/decoder.hpp"
#include "cosnet/semantics/comprehender.hpp"
#include "cosnet/semantics/ranker.hpp"
#include "cosnet/semantics/semantic_head.hpp"
#include "cosnet/semantics/visual_encoder.hpp"

namespace cosnet::model {

struct ModelConfig {
  std::size_t feature_dim = 64;  // D_in
  std::size_t model_dim = 512;   // D
  std::size_t heads = 8;
  std::size_t visual_layers = 6;    // N_v
  std::size_t semantic_layers = 3;  // N_s
  std::size_t decoder_layers = 6;   // N_d
  std::size_t slots = 16;           // N_o
  std::size_t positions = 36;       // N_p
  std::size_t max_length = 20;      // T_max, EOS included
  std::size_t word_vocab_size = 0;
  std::size_t semantic_vocab_size = 0;  // N_c + 1
  bool use_retrieval = true;
  bool use_filter_loss = true;
  bool use_missing_loss = true;
  bool use_ranker = true;
  semantics::AsymmetricLossConfig asl;

  /// With every ablation flag off the model reduces to the visual-only
  /// encoder-decoder: no comprehender, no semantic cross-attention.
  bool semantic_branch() const noexcept {
    return use_retrieval || use_filter_loss || use_missing_loss || use_ranker;
  }
  /// Throws ConfigError naming the first bad field.
  void validate() const;
};

struct ImageInput {
  Tensor<float> global;  // D_in
  Tensor<float> grid;    // N_I x D_in
  std::vector<std::size_t> cues;  // semantic vocabulary indices
};

struct TrainingExample {
  ImageInput image;
  std::vector<std::vector<std::size_t>> captions;  // word ids, no BOS/EOS
  std::set<std::size_t> semantic_words;            // ground-truth semantic indices
};

template <std::floating_point T>
class CosNetModel {
 public:
  CosNetModel(const ModelConfig& config, std::uint64_t seed);
  CosNetModel(const CosNetModel&) = delete;
  CosNetModel& operator=(const CosNetModel&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore<T>& parameters() noexcept { return store_; }
  const ParameterStore<T>& parameters() const noexcept { return store_; }

  struct Encoded {
    semantics::VisualTokens<T> visual;
    std::optional<semantics::SemanticTokens<T>> semantic;
    std::optional<semantics::SemanticPredictions<T>> predictions;
    std::optional<semantics::PositionAwareSemantics<T>> ranked;
    Var<T> semantic_context;  // what the decoder attends to; invalid without the branch
  };

  Encoded encode(Graph<T>& graph, const ImageInput& input) const;

  /// Per-row next-token logits for BOS-initial sequences.
  Var<T> logits(const Encoded& encoded, const std::vector<std::vector<std::size_t>>& sequences) const;

  struct ExampleLoss {
    Var<T> total;
    Var<T> caption;
    Var<T> filter;
    Var<T> missing;
  };

  /// Teacher-forced objective for one image and all of its captions.
  ExampleLoss example_loss(Graph<T>& graph, const TrainingExample& example) const;

  decoder::BeamHypothesis caption(const ImageInput& input, std::size_t beam) const;
  /// Next-token log-probabilities given a fixed encoding (for decoding tests).
  decoder::StepScorer scorer(const ImageInput& input) const;

  /// Argmax class of every cue row; empty without the semantic branch.
  std::vector<std::size_t> cue_decisions(const ImageInput& input) const;

  decoder::BeamConfig beam_config(std::size_t beam) const;

 private:
  ModelConfig config_;
  ParameterStore<T> store_;
  semantics::VisualEncoderParams<T> visual_;
  semantics::ComprehenderParams<T> comprehender_;
  semantics::SemanticHeadParams<T> head_;
  semantics::RankerParams<T> ranker_;
  decoder::DecoderParams<T> decoder_;
};

extern template class CosNetModel<float>;
extern template class CosNetModel<double>;

}  // namespace cosnet::model
