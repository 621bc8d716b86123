#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cosnet/corpus/record.hpp"
#include "cosnet/corpus/word_vocab.hpp"
#include "cosnet/model/cosnet.hpp"
#include "cosnet/numerics/optim.hpp"
#include "cosnet/retrieval/semantic_vocab.hpp"
#include "cosnet/retrieval/sentence_pool.hpp"

namespace cosnet::model {

/// Everything needed to turn an image into semantic cues.
struct CueSource {
  const retrieval::SentencePool* pool = nullptr;
  const retrieval::EmbeddingProvider* embedder = nullptr;
  const retrieval::StopWords* stopwords = nullptr;
  const retrieval::SemanticVocabulary* vocab = nullptr;
  std::size_t retrieved = 5;   // K
  std::size_t max_cues = 20;   // N_r_max
};

/// Retrieves the top-K pool sentences for the record's image embedding and
/// harvests cue indices. `exclude_self` drops the record's own captions.
std::vector<std::size_t> retrieve_cues(const corpus::CorpusRecord& record, const CueSource& source,
                                       bool exclude_self);

ImageInput make_image_input(const corpus::CorpusRecord& record, const CueSource* source, bool exclude_self);

TrainingExample make_training_example(const corpus::CorpusRecord& record, const corpus::WordVocabulary& words,
                                      const CueSource* source);

struct TrainerConfig {
  std::size_t batch_size = 32;
  std::int64_t warmup = 1000;
  double lr_factor = 1.0;
  std::uint64_t shuffle_seed = 1;
  AdamConfig adam;
};

class Trainer {
 public:
  Trainer(CosNetModel<float>& model, TrainerConfig config);

  /// Mean objective over the batch, one backward pass, one Adam update.
  /// Throws NumericalError on a non-finite loss before touching parameters.
  decoder::LossBreakdown train_step(std::span<const TrainingExample* const> batch);

  using StepCallback = std::function<void(std::int64_t step, const decoder::LossBreakdown&)>;
  /// One pass over `data` in a seeded order; returns the epoch mean.
  decoder::LossBreakdown train_epoch(const std::vector<TrainingExample>& data, const StepCallback& on_step = {});

  Adam& optimizer() noexcept { return adam_; }
  std::int64_t step() const noexcept { return adam_.steps(); }
  std::size_t epoch() const noexcept { return epoch_; }
  void set_epoch(std::size_t e) noexcept { epoch_ = e; }

 private:
  CosNetModel<float>& model_;
  TrainerConfig config_;
  Adam adam_;
  std::size_t epoch_ = 0;
};

struct FilterAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// A cue decision is correct when the argmax class equals its label: the
/// word itself for ground-truth words, the irrelevant token otherwise.
FilterAccuracy filtering_accuracy(const CosNetModel<float>& model, std::span<const TrainingExample> examples);

}  // namespace cosnet::model
