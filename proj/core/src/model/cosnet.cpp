#include "cosnet/model/cosnet.hpp"

#include <algorithm>
#include <cmath>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::model {

namespace {
constexpr std::size_t kPad = 0;
constexpr std::size_t kBos = 1;
constexpr std::size_t kEos = 2;
}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(feature_dim, "feature_dim");
  positive(model_dim, "model_dim");
  positive(heads, "heads");
  positive(visual_layers, "visual_layers");
  positive(semantic_layers, "semantic_layers");
  positive(decoder_layers, "decoder_layers");
  positive(slots, "slots");
  positive(positions, "positions");
  positive(max_length, "max_length");
  if (model_dim % heads != 0) throw ConfigError("heads must divide model_dim");
  if (word_vocab_size <= kEos + 1) throw ConfigError("word vocabulary must contain words beyond the specials");
  if (semantic_branch() && semantic_vocab_size < 2) {
    throw ConfigError("semantic vocabulary must contain at least one word");
  }
  if (asl.gamma_positive < 0 || asl.gamma_negative < 0 || asl.margin < 0 || asl.margin >= 1) {
    throw ConfigError("asymmetric loss needs gamma >= 0 and margin in [0, 1)");
  }
}

template <std::floating_point T>
CosNetModel<T>::CosNetModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const auto& c = config_;
  visual_ = semantics::make_visual_encoder(store_, "visual", c.feature_dim, c.model_dim, c.heads,
                                           c.visual_layers, rng);
  if (c.semantic_branch()) {
    comprehender_ = semantics::make_comprehender(store_, "comprehender", c.model_dim, c.heads, c.semantic_layers,
                                                 c.slots, c.semantic_vocab_size, rng);
    head_ = semantics::make_semantic_head(store_, "semantic_head", c.model_dim, c.semantic_vocab_size, rng);
    if (c.use_ranker) ranker_ = semantics::make_ranker(store_, "ranker", c.positions, c.model_dim, rng);
  }
  decoder_ = decoder::make_decoder(store_, "decoder", c.word_vocab_size, c.model_dim, c.heads, c.decoder_layers,
                                   c.max_length, c.semantic_branch(), rng);
}

template <std::floating_point T>
typename CosNetModel<T>::Encoded CosNetModel<T>::encode(Graph<T>& graph, const ImageInput& input) const {
  Encoded out;
  Var<T> global = graph.constant(input.global.template cast<T>());
  Var<T> grid = graph.constant(input.grid.template cast<T>());
  out.visual = semantics::encode_visual(visual_, semantics::project_visual_inputs(visual_, global, grid));
  if (!config_.semantic_branch()) return out;

  const std::span<const std::size_t> cues =
      config_.use_retrieval ? std::span<const std::size_t>(input.cues) : std::span<const std::size_t>();
  out.semantic = semantics::comprehend(comprehender_, cues, out.visual.tokens);
  out.predictions = semantics::predict_semantics(head_, *out.semantic);
  if (config_.use_ranker) {
    out.ranked = semantics::rank_semantics(ranker_, out.semantic->tokens);
    out.semantic_context = out.ranked->tokens;
  } else {
    out.semantic_context = out.semantic->tokens;
  }
  return out;
}

template <std::floating_point T>
Var<T> CosNetModel<T>::logits(const Encoded& encoded, const std::vector<std::vector<std::size_t>>& sequences) const {
  return decoder::decoder_forward(decoder_, sequences, encoded.visual.tokens, encoded.semantic_context);
}

template <std::floating_point T>
typename CosNetModel<T>::ExampleLoss CosNetModel<T>::example_loss(Graph<T>& graph,
                                                                  const TrainingExample& example) const {
  if (example.captions.empty()) throw ContractError("training example without captions");
  const Encoded enc = encode(graph, example.image);

  std::vector<std::vector<std::size_t>> inputs;
  std::vector<std::size_t> targets;
  for (const auto& caption : example.captions) {
    const std::size_t words = std::min(caption.size(), config_.max_length - 1);
    std::vector<std::size_t> in{kBos};
    in.insert(in.end(), caption.begin(), caption.begin() + static_cast<std::ptrdiff_t>(words));
    targets.insert(targets.end(), caption.begin(), caption.begin() + static_cast<std::ptrdiff_t>(words));
    targets.push_back(kEos);
    inputs.push_back(std::move(in));
  }
  ExampleLoss loss;
  loss.caption = decoder::caption_loss(logits(enc, inputs), std::span<const std::size_t>(targets), kPad);
  loss.filter = graph.constant(Tensor<T>::scalar(0));
  loss.missing = graph.constant(Tensor<T>::scalar(0));
  if (enc.semantic) {
    const auto& cues = enc.semantic->cue_indices;
    const std::size_t irrelevant = config_.semantic_vocab_size - 1;
    if (config_.use_filter_loss && !cues.empty()) {
      const auto labels = semantics::make_cue_labels(cues, example.semantic_words, irrelevant);
      loss.filter = semantics::loss_filter(graph, enc.predictions->cue_log_probs, std::span<const std::size_t>(labels));
    }
    if (config_.use_missing_loss) {
      const auto y = semantics::make_missing_labels(example.semantic_words, cues, config_.semantic_vocab_size);
      loss.missing = semantics::loss_missing(enc.predictions->pooled, std::span<const std::uint8_t>(y), config_.asl);
    }
  }
  loss.total = add(add(loss.caption, loss.filter), loss.missing);
  return loss;
}

template <std::floating_point T>
decoder::BeamConfig CosNetModel<T>::beam_config(std::size_t beam) const {
  decoder::BeamConfig bc;
  bc.beam = beam;
  bc.max_length = config_.max_length;
  bc.bos = kBos;
  bc.eos = kEos;
  bc.banned = {kPad, kBos};
  return bc;
}

template <std::floating_point T>
decoder::StepScorer CosNetModel<T>::scorer(const ImageInput& input) const {
  // Encode once; every decoding step reuses the token values as constants.
  Tensor<T> visual, semantic;
  {
    Graph<T> g;
    const Encoded enc = encode(g, input);
    visual = enc.visual.tokens.value();
    if (enc.semantic_context.valid()) semantic = enc.semantic_context.value();
  }
  return [this, visual = std::move(visual), semantic = std::move(semantic)](
             const std::vector<std::vector<std::size_t>>& prefixes) {
    Graph<T> g;
    Encoded enc;
    enc.visual.tokens = g.constant(visual);
    if (!semantic.empty()) enc.semantic_context = g.constant(semantic);
    const Tensor<T> lg = logits(enc, prefixes).value();
    std::vector<std::vector<double>> out;
    std::size_t row = 0;
    for (const auto& p : prefixes) {
      row += p.size();
      const auto r = lg.row(row - 1);
      double mx = r[0];
      for (T v : r) mx = std::max(mx, static_cast<double>(v));
      double z = 0.0;
      for (T v : r) z += std::exp(static_cast<double>(v) - mx);
      const double log_z = mx + std::log(z);
      std::vector<double> lp(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) lp[i] = static_cast<double>(r[i]) - log_z;
      out.push_back(std::move(lp));
    }
    return out;
  };
}

template <std::floating_point T>
decoder::BeamHypothesis CosNetModel<T>::caption(const ImageInput& input, std::size_t beam) const {
  return decoder::beam_search(scorer(input), beam_config(beam));
}

template <std::floating_point T>
std::vector<std::size_t> CosNetModel<T>::cue_decisions(const ImageInput& input) const {
  Graph<T> g;
  const Encoded enc = encode(g, input);
  std::vector<std::size_t> out;
  if (!enc.semantic || enc.semantic->cue_count() == 0) return out;
  const Tensor<T>& lp = enc.predictions->cue_log_probs.value();
  for (std::size_t r = 0; r < lp.rows(); ++r) {
    const auto row = lp.row(r);
    out.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

template class CosNetModel<float>;
template class CosNetModel<double>;

}  // namespace cosnet::model
