#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cosnet/app/config.hpp"
#include "cosnet/corpus/lexicon.hpp"
#include "cosnet/corpus/split.hpp"
#include "cosnet/corpus/word_vocab.hpp"
#include "cosnet/metrics/report.hpp"
#include "cosnet/model/training.hpp"

namespace cosnet::app {

/// File layout of one run directory.
struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path corpus, split, lexicon, stopwords;
  std::filesystem::path words, semantic_vocab, pool;
  std::filesystem::path checkpoint, loss_log, config, lock;
  std::filesystem::path captions(const std::string& section) const;
  std::filesystem::path report_text(const std::string& section) const;
  std::filesystem::path report_json(const std::string& section) const;
};

/// Absolute `run_dir` is used as is; a relative one resolves under
/// $COSNET_RUN_ROOT (default "runs").
RunPaths run_paths(const RunConfig& config);

/// Everything train/caption need, loaded from a prepared run directory.
struct RunData {
  std::vector<corpus::CorpusRecord> records;
  std::map<std::string, std::size_t> by_id;
  corpus::SplitSpec split;
  corpus::ObjectLexicon lexicon;
  retrieval::StopWords stopwords;
  corpus::WordVocabulary words;
  retrieval::SemanticVocabulary semantic_vocab;
  retrieval::SentencePool pool;
  std::unique_ptr<retrieval::EmbeddingProvider> embedder;

  model::CueSource cue_source(const RunConfig& config) const;
  const std::vector<std::string>& section(const std::string& name) const;
};

RunData load_run_data(const RunConfig& config);

/// The id list of "train", "val" or "test"; ConfigError otherwise.
const std::vector<std::string>& split_section(const corpus::SplitSpec& split, const std::string& name);

// Subcommands. Each validates the configuration, reads its inputs from the
// run directory and writes its outputs there atomically.
void run_gen_corpus(const RunConfig& config, std::ostream& log);
void run_build_vocab(const RunConfig& config, std::ostream& log);
void run_build_index(const RunConfig& config, std::ostream& log);

struct TrainSummary {
  decoder::LossBreakdown last_epoch;
  std::int64_t steps = 0;
  std::size_t epochs = 0;
  double seconds = 0.0;
};

/// Holds run_dir/train.lock for its duration; logs one line per step to
/// loss.tsv and checkpoints every `checkpoint_every` epochs.
TrainSummary run_train(const RunConfig& config, std::ostream& log);

/// Captions every image of a split section ("train", "val" or "test") and
/// writes "image_id<TAB>caption" lines. Refuses checkpoints whose config
/// hash differs.
std::filesystem::path run_caption(const RunConfig& config, const std::string& section, std::ostream& log);

/// Scores the captions file of a section against the corpus references.
metrics::EvaluationReport run_evaluate(const RunConfig& config, const std::string& section,
                                       const std::filesystem::path& captions, std::ostream& log);

/// Reads "image_id<TAB>caption" lines.
std::map<std::string, corpus::Caption> read_captions(const std::filesystem::path& path);

}  // namespace cosnet::app
