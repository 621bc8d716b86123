#include "cosnet/model/training.hpp"

#include <cmath>
#include <numeric>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::model {

std::vector<std::size_t> retrieve_cues(const corpus::CorpusRecord& record, const CueSource& source,
                                       bool exclude_self) {
  const auto query = source.embedder->embed_image(record);
  std::optional<std::string_view> exclude;
  if (exclude_self) exclude = record.image_id;
  const auto hits = retrieval::retrieve_top_k(query, *source.pool, source.retrieved, exclude);
  std::vector<corpus::Caption> sentences;
  for (auto id : hits.sentence_ids) sentences.push_back(source.pool->find(id)->tokens);
  return retrieval::extract_semantic_cues(sentences, *source.stopwords, *source.vocab, source.max_cues).indices();
}

ImageInput make_image_input(const corpus::CorpusRecord& record, const CueSource* source, bool exclude_self) {
  ImageInput in;
  in.global = record.global_feature;
  in.grid = record.grid_features;
  if (source != nullptr) in.cues = retrieve_cues(record, *source, exclude_self);
  return in;
}

TrainingExample make_training_example(const corpus::CorpusRecord& record, const corpus::WordVocabulary& words,
                                      const CueSource* source) {
  TrainingExample ex;
  ex.image = make_image_input(record, source, true);
  for (const auto& c : record.captions) ex.captions.push_back(words.encode(c));
  if (source != nullptr) {
    const auto gt = retrieval::ground_truth_semantic_words(record.captions, *source->stopwords, *source->vocab);
    ex.semantic_words.insert(gt.begin(), gt.end());
  }
  return ex;
}

Trainer::Trainer(CosNetModel<float>& model, TrainerConfig config)
    : model_(model), config_(config), adam_(config.adam) {
  if (config_.batch_size == 0) throw ConfigError("batch size must be positive");
  if (config_.warmup <= 0) throw ConfigError("warmup must be positive");
}

decoder::LossBreakdown Trainer::train_step(std::span<const TrainingExample* const> batch) {
  if (batch.empty()) throw ContractError("empty training batch");
  Graph<float> g;
  std::vector<Var<float>> totals;
  double caption = 0.0, filter = 0.0, missing = 0.0;
  for (const TrainingExample* ex : batch) {
    const auto loss = model_.example_loss(g, *ex);
    totals.push_back(loss.total);
    caption += loss.caption.value().item();
    filter += loss.filter.value().item();
    missing += loss.missing.value().item();
  }
  const double n = static_cast<double>(batch.size());
  Var<float> objective = totals.front();
  for (std::size_t i = 1; i < totals.size(); ++i) objective = add(objective, totals[i]);
  objective = scale(objective, static_cast<float>(1.0 / n));
  auto breakdown = decoder::total_loss(caption / n, filter / n, missing / n);
  // Report the value that is differentiated, not the re-summed components.
  breakdown.total = objective.value().item();
  if (!std::isfinite(objective.value().item()) || !std::isfinite(breakdown.total)) {
    throw NumericalError("non-finite loss at step " + std::to_string(adam_.steps() + 1) +
                         " (L_XE=" + std::to_string(breakdown.caption) + ", L_x=" + std::to_string(breakdown.filter) +
                         ", L_m=" + std::to_string(breakdown.missing) + ")");
  }
  g.backward(objective);
  g.accumulate_parameter_grads();
  const double lr = noam_rate(adam_.steps() + 1, model_.config().model_dim, config_.warmup, config_.lr_factor);
  adam_.step(model_.parameters(), lr);
  return breakdown;
}

decoder::LossBreakdown Trainer::train_epoch(const std::vector<TrainingExample>& data, const StepCallback& on_step) {
  if (data.empty()) throw ContractError("empty training set");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(config_.shuffle_seed, epoch_));
  rng.shuffle(order);
  double caption = 0.0, filter = 0.0, missing = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    std::vector<const TrainingExample*> batch;
    for (std::size_t i = start; i < std::min(order.size(), start + config_.batch_size); ++i) {
      batch.push_back(&data[order[i]]);
    }
    const auto b = train_step(batch);
    if (on_step) on_step(adam_.steps(), b);
    caption += b.caption;
    filter += b.filter;
    missing += b.missing;
    ++batches;
  }
  ++epoch_;
  const double n = static_cast<double>(batches);
  return decoder::total_loss(caption / n, filter / n, missing / n);
}

FilterAccuracy filtering_accuracy(const CosNetModel<float>& model, std::span<const TrainingExample> examples) {
  FilterAccuracy acc;
  const std::size_t irrelevant = model.config().semantic_vocab_size - 1;
  for (const auto& ex : examples) {
    const auto decisions = model.cue_decisions(ex.image);
    const auto labels = semantics::make_cue_labels(ex.image.cues, ex.semantic_words, irrelevant);
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      acc.correct += decisions[i] == labels[i] ? 1 : 0;
      ++acc.total;
    }
  }
  return acc;
}

}  // namespace cosnet::model
