#include "cosnet/app/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include "cosnet/app/checkpoint.hpp"
#include "cosnet/corpus/generator.hpp"
#include "cosnet/corpus/io.hpp"
#include "cosnet/corpus/tokenize.hpp"
#include "cosnet/numerics/errors.hpp"

namespace cosnet::app {

namespace fs = std::filesystem;

fs::path RunPaths::captions(const std::string& section) const { return dir / ("captions_" + section + ".tsv"); }
fs::path RunPaths::report_text(const std::string& section) const { return dir / ("report_" + section + ".txt"); }
fs::path RunPaths::report_json(const std::string& section) const { return dir / ("report_" + section + ".json"); }

RunPaths run_paths(const RunConfig& config) {
  RunPaths p;
  fs::path dir(config.run_dir);
  if (dir.is_relative()) {
    const char* root = std::getenv("COSNET_RUN_ROOT");
    dir = fs::path(root != nullptr && *root != '\0' ? root : "runs") / dir;
  }
  p.dir = dir;
  p.corpus = dir / "corpus.jsonl";
  p.split = dir / "split.txt";
  p.lexicon = dir / "lexicon.tsv";
  p.stopwords = dir / "stopwords.txt";
  p.words = dir / "words.txt";
  p.semantic_vocab = dir / "semantic_vocab.txt";
  p.pool = dir / "pool.jsonl";
  p.checkpoint = dir / "checkpoint.bin";
  p.loss_log = dir / "loss.tsv";
  p.config = dir / "config.ini";
  p.lock = dir / "train.lock";
  return p;
}

namespace {

void require(const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw DataError("missing input " + path.string() + " (run '" + producer + "' first)");
  }
}

std::vector<corpus::CorpusRecord> select(const std::vector<corpus::CorpusRecord>& records,
                                         const std::map<std::string, std::size_t>& by_id,
                                         const std::vector<std::string>& ids) {
  std::vector<corpus::CorpusRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("split names unknown image " + id);
    out.push_back(records[it->second]);
  }
  return out;
}

std::map<std::string, std::size_t> index_records(const std::vector<corpus::CorpusRecord>& records) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_id.emplace(records[i].image_id, i).second) throw DataError("duplicate image id " + records[i].image_id);
  }
  return by_id;
}

/// Removes the lock file when training ends, however it ends.
class RunLock {
 public:
  explicit RunLock(fs::path path) : path_(std::move(path)) {
    fs::create_directories(path_.parent_path());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw DataError("run directory is locked by " + path_.string() +
                      " (another training process, or a stale lock to delete)");
    }
    std::fclose(f);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

std::string format_loss_line(std::int64_t step, const decoder::LossBreakdown& b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld\t%.9g\t%.9g\t%.9g\t%.9g\n", static_cast<long long>(step), b.total, b.caption,
                b.filter, b.missing);
  return buf;
}

}  // namespace

model::CueSource RunData::cue_source(const RunConfig& config) const {
  model::CueSource s;
  s.pool = &pool;
  s.embedder = embedder.get();
  s.stopwords = &stopwords;
  s.vocab = &semantic_vocab;
  s.retrieved = config.retrieved;
  s.max_cues = config.max_cues;
  return s;
}

const std::vector<std::string>& split_section(const corpus::SplitSpec& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  throw ConfigError("unknown split section '" + name + "' (expected train, val or test)");
}

const std::vector<std::string>& RunData::section(const std::string& name) const { return split_section(split, name); }

RunData load_run_data(const RunConfig& config) {
  const RunPaths paths = run_paths(config);
  require(paths.corpus, "gen-corpus");
  require(paths.split, "gen-corpus");
  require(paths.words, "build-vocab");
  require(paths.semantic_vocab, "build-vocab");
  require(paths.pool, "build-index");
  RunData d;
  d.records = corpus::load_corpus(paths.corpus);
  d.by_id = index_records(d.records);
  d.split = corpus::load_split(paths.split);
  d.lexicon = fs::exists(paths.lexicon) ? corpus::ObjectLexicon::load(paths.lexicon) : corpus::generator_lexicon();
  d.stopwords = fs::exists(paths.stopwords) ? retrieval::StopWords::load(paths.stopwords)
                                            : retrieval::StopWords::english();
  d.words = corpus::WordVocabulary::load(paths.words);
  d.semantic_vocab = retrieval::SemanticVocabulary::load(paths.semantic_vocab);
  d.pool = retrieval::SentencePool::load(paths.pool);
  d.embedder = std::make_unique<retrieval::EmbeddingProvider>(config.embedding_dim, config.embedding_seed);
  return d;
}

void run_gen_corpus(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  const auto records = corpus::generate_corpus(generator_config(config));
  const auto lexicon = corpus::generator_lexicon();
  const auto split = config.split_mode == "robust"
                         ? corpus::build_robust_split(records, lexicon, config.split_seed, config.held_out_fraction)
                         : corpus::build_standard_split(records, config.val_fraction, config.test_fraction,
                                                        config.split_seed);
  const auto check = corpus::verify_split(records, split, lexicon);
  if (!check.ok) throw DataError("split verification failed: " + check.problem);
  corpus::save_corpus(paths.corpus, records);
  corpus::save_split(paths.split, split);
  lexicon.save(paths.lexicon);
  retrieval::StopWords::english().save(paths.stopwords);
  log << "corpus: " << records.size() << " images -> " << paths.corpus.string() << "\n"
      << "split (" << config.split_mode << "): train " << split.train.size() << ", val " << split.val.size()
      << ", test " << split.test.size() << "\n";
}

void run_build_vocab(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  require(paths.corpus, "gen-corpus");
  require(paths.split, "gen-corpus");
  const auto records = corpus::load_corpus(paths.corpus);
  const auto by_id = index_records(records);
  const auto train = select(records, by_id, corpus::load_split(paths.split).train);
  const auto stopwords =
      fs::exists(paths.stopwords) ? retrieval::StopWords::load(paths.stopwords) : retrieval::StopWords::english();
  const auto words = corpus::build_word_vocab(train, config.min_count);
  std::vector<corpus::Caption> captions;
  for (const auto& r : train) captions.insert(captions.end(), r.captions.begin(), r.captions.end());
  const auto semantic = retrieval::build_semantic_vocab(captions, stopwords, config.semantic_vocab);
  words.save(paths.words);
  semantic.save(paths.semantic_vocab);
  log << "word vocabulary: " << words.size() << " entries (min_count " << config.min_count << ")\n"
      << "semantic vocabulary: " << semantic.size() << " words";
  if (semantic.shortfall()) log << " (requested " << semantic.requested() << ")";
  log << "\n";
}

void run_build_index(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  require(paths.corpus, "gen-corpus");
  require(paths.split, "gen-corpus");
  const auto records = corpus::load_corpus(paths.corpus);
  const auto train = select(records, index_records(records), corpus::load_split(paths.split).train);
  const retrieval::EmbeddingProvider embedder(config.embedding_dim, config.embedding_seed);
  const auto pool = retrieval::SentencePool::build(train, embedder);
  pool.save(paths.pool);
  log << "sentence pool: " << pool.size() << " training sentences -> " << paths.pool.string() << "\n";
}

TrainSummary run_train(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  const RunData data = load_run_data(config);
  RunLock lock(paths.lock);
  const auto start = std::chrono::steady_clock::now();

  corpus::write_file_atomic(paths.config, serialize_config(config));
  const std::uint64_t hash = config_hash(config);
  const auto source = data.cue_source(config);
  std::vector<model::TrainingExample> examples;
  for (const auto& id : data.split.train) {
    examples.push_back(model::make_training_example(data.records.at(data.by_id.at(id)), data.words, &source));
  }
  if (examples.empty()) throw DataError("training split is empty");

  model::CosNetModel<float> net(model_config(config, data.words.size(), data.semantic_vocab.classes()),
                                derive_seed(config.seed, 1));
  model::Trainer trainer(net, trainer_config(config));
  log << "training " << net.parameters().total_elements() << " parameters on " << examples.size()
      << " images, config hash " << hash_hex(hash) << "\n";

  std::string loss_text;
  TrainSummary summary;
  try {
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      summary.last_epoch = trainer.train_epoch(
          examples, [&](std::int64_t step, const decoder::LossBreakdown& b) { loss_text += format_loss_line(step, b); });
      corpus::write_file_atomic(paths.loss_log, loss_text);
      const bool last = epoch + 1 == config.epochs;
      if (last || (epoch + 1) % config.checkpoint_every == 0) {
        save_checkpoint(paths.checkpoint, capture_checkpoint(net, &trainer.optimizer(), hash, epoch + 1));
      }
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %zu  L %.4f  L_XE %.4f  L_x %.4f  L_m %.4f\n", epoch + 1,
                    summary.last_epoch.total, summary.last_epoch.caption, summary.last_epoch.filter,
                    summary.last_epoch.missing);
      log << buf << std::flush;
    }
  } catch (const NumericalError&) {
    corpus::write_file_atomic(paths.loss_log, loss_text);
    log << "numerical failure; last checkpoint kept at " << paths.checkpoint.string() << "\n";
    throw;
  }
  summary.steps = trainer.step();
  summary.epochs = config.epochs;
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

std::filesystem::path run_caption(const RunConfig& config, const std::string& section, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  const RunData data = load_run_data(config);
  require(paths.checkpoint, "train");
  const auto checkpoint = load_checkpoint(paths.checkpoint);
  const std::uint64_t hash = config_hash(config);
  if (checkpoint.config_hash != hash) {
    throw ConfigError("checkpoint config hash " + hash_hex(checkpoint.config_hash) +
                      " does not match the current configuration " + hash_hex(hash));
  }
  model::CosNetModel<float> net(model_config(config, data.words.size(), data.semantic_vocab.classes()),
                                derive_seed(config.seed, 1));
  restore_checkpoint(net, nullptr, checkpoint);
  const auto source = data.cue_source(config);
  std::string text;
  const auto& ids = data.section(section);
  for (const auto& id : ids) {
    const auto input = model::make_image_input(data.records.at(data.by_id.at(id)), &source, false);
    const auto hyp = net.caption(input, config.beam);
    text += id + "\t" + corpus::join_tokens(data.words.decode(hyp.tokens)) + "\n";
  }
  const auto out = paths.captions(section);
  corpus::write_file_atomic(out, text);
  log << "captioned " << ids.size() << " " << section << " images -> " << out.string() << "\n";
  return out;
}

std::map<std::string, corpus::Caption> read_captions(const fs::path& path) {
  std::map<std::string, corpus::Caption> out;
  for (const auto& line : corpus::read_lines(path)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ": expected image_id<TAB>caption");
    out[line.substr(0, tab)] = corpus::tokenize(line.substr(tab + 1));
  }
  return out;
}

metrics::EvaluationReport run_evaluate(const RunConfig& config, const std::string& section,
                                       const fs::path& captions_path, std::ostream& log) {
  validate_config(config);
  const RunPaths paths = run_paths(config);
  require(paths.corpus, "gen-corpus");
  require(paths.split, "gen-corpus");
  require(captions_path, "caption");
  const auto records = corpus::load_corpus(paths.corpus);
  const auto by_id = index_records(records);
  const auto split = corpus::load_split(paths.split);
  const auto lexicon =
      fs::exists(paths.lexicon) ? corpus::ObjectLexicon::load(paths.lexicon) : corpus::generator_lexicon();
  const auto captions = read_captions(captions_path);

  auto ids = split_section(split, section);
  std::sort(ids.begin(), ids.end());
  std::vector<std::string> missing;
  std::vector<corpus::Caption> candidates;
  std::vector<std::vector<corpus::Caption>> references;
  std::vector<std::set<std::string>> objects;
  for (const auto& id : ids) {
    auto c = captions.find(id);
    if (c == captions.end()) {
      missing.push_back(id);
      continue;
    }
    const auto& r = records.at(by_id.at(id));
    candidates.push_back(c->second);
    references.push_back(r.captions);
    objects.push_back(r.gt_objects);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += " " + id;
    throw DataError(std::to_string(missing.size()) + " image(s) have no caption:" + list);
  }
  const auto report = metrics::evaluate(candidates, references, objects, lexicon);
  corpus::write_file_atomic(paths.report_text(section), metrics::report_text(report));
  corpus::write_file_atomic(paths.report_json(section), metrics::report_json(report));
  log << metrics::report_text(report);
  return report;
}

}  // namespace cosnet::app
