#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "acceptance.hpp"
#include "cosnet/app/checkpoint.hpp"
#include "cosnet/app/config.hpp"
#include "cosnet/app/pipeline.hpp"
#include "cosnet/corpus/io.hpp"
#include "cosnet/model/training.hpp"
#include "../support/fixtures.hpp"

namespace cosnet::acceptance {

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Desk-scale model shared by the training criteria.
app::RunConfig small_run(const fs::path& dir) {
  app::RunConfig c;
  c.run_dir = dir.string();
  c.min_count = 1;
  c.semantic_vocab = 200;
  c.model_dim = 64;
  c.heads = 4;
  c.visual_layers = 2;
  c.semantic_layers = 1;
  c.decoder_layers = 2;
  c.slots = 8;
  c.positions = 16;
  c.max_length = 16;
  c.val_fraction = 0.0;
  c.test_fraction = 0.0;
  c.checkpoint_every = 1000;
  return c;
}

void apply(app::RunConfig& c, const Overrides& overrides) {
  for (const auto& [k, v] : overrides) app::set_field(c, k, v);
}

void prepare(const app::RunConfig& c, std::ostream& log) {
  app::run_gen_corpus(c, log);
  app::run_build_vocab(c, log);
  app::run_build_index(c, log);
}

}  // namespace

Outcome overfit(const Overrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir("overfit");
  auto c = small_run(dir.path() / "run");
  c.images = 16;
  c.captions_per_image = 1;
  c.epochs = 300;
  c.batch_size = 16;
  c.warmup = 50;
  apply(c, overrides);
  std::ostringstream log;
  prepare(c, log);
  const auto summary = app::run_train(c, log);
  const auto captions = app::read_captions(app::run_caption(c, "train", log));

  const auto records = corpus::load_corpus(app::run_paths(c).corpus);
  std::size_t exact = 0;
  for (const auto& r : records) {
    auto it = captions.find(r.image_id);
    if (it != captions.end() && it->second == r.captions.front()) ++exact;
  }
  const double secs = seconds_since(start);
  const bool ok = summary.last_epoch.caption < 0.1 && exact >= 14 && secs < 600.0;
  return {ok, format("final L_XE %.4g after %zu epochs, %zu/%zu captions reproduced, %.0fs", summary.last_epoch.caption,
                     summary.epochs, exact, records.size(), secs)};
}

Outcome comprehender_learnability(const Overrides& overrides) {
  testing::TempDir dir("comprehender");
  auto c = small_run(dir.path() / "run");
  c.images = 200;
  c.epochs = 40;
  c.batch_size = 16;
  c.warmup = 100;
  apply(c, overrides);
  std::ostringstream log;
  prepare(c, log);
  const auto summary = app::run_train(c, log);

  const auto data = app::load_run_data(c);
  const auto source = data.cue_source(c);
  std::vector<model::TrainingExample> examples;
  for (const auto& id : data.split.train) {
    examples.push_back(model::make_training_example(data.records.at(data.by_id.at(id)), data.words, &source));
  }
  model::CosNetModel<float> net(app::model_config(c, data.words.size(), data.semantic_vocab.classes()), 0);
  app::restore_checkpoint(net, nullptr, app::load_checkpoint(app::run_paths(c).checkpoint));
  const auto acc = model::filtering_accuracy(net, examples);
  return {acc.value() >= 0.85, format("filtering accuracy %.4f (%zu/%zu cue decisions) on %zu training images, L_x %.4f",
                                      acc.value(), acc.correct, acc.total, examples.size(), summary.last_epoch.filter)};
}

Outcome directional_ablation(const Overrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir("ablation");
  auto base = small_run(dir.path() / "shared");
  base.images = 500;
  base.val_fraction = 0.2;
  // Noisy grid features leave room for retrieved cues to add information.
  // With clean features (noise 0.5) the base model already sees every object
  // and the cues only contribute their false positives.
  base.feature_noise = 1.5;
  base.epochs = 20;
  base.batch_size = 16;
  base.warmup = 200;
  apply(base, overrides);
  std::ostringstream log;
  prepare(base, log);

  double cider[2] = {0, 0}, chs[2] = {0, 0};
  std::string per_seed;
  constexpr int kSeeds = 3;
  for (int variant = 0; variant < 2; ++variant) {
    for (int s = 1; s <= kSeeds; ++s) {
      auto c = base;
      c.seed = static_cast<std::uint64_t>(s);
      const bool full = variant == 0;
      c.use_retrieval = c.use_filter_loss = c.use_missing_loss = c.use_ranker = full;
      // Each model gets its own copy of the prepared inputs.
      const fs::path run = dir.path() / ((full ? "full" : "base") + std::to_string(s));
      fs::create_directories(run);
      for (const auto& e : fs::directory_iterator(base.run_dir)) fs::copy(e.path(), run / e.path().filename());
      c.run_dir = run.string();
      app::run_train(c, log);
      const auto report = app::run_evaluate(c, "val", app::run_caption(c, "val", log), log);
      cider[variant] += report.cider / kSeeds;
      chs[variant] += report.chair_s / kSeeds;
      per_seed += format(" %s%d:%.3f/%.3f", full ? "full" : "base", s, report.cider, report.chair_s);
    }
  }
  const double secs = seconds_since(start);
  const bool ok = cider[0] >= cider[1] && chs[0] <= chs[1] && secs < 1800.0;
  return {ok, format("val CIDEr full %.4f vs base %.4f, CHs full %.4f vs base %.4f, %.0fs; per seed CIDEr/CHs%s",
                     cider[0], cider[1], chs[0], chs[1], secs, per_seed.c_str())};
}

bool identical_checkpoints(const fs::path& scratch) {
  auto c = small_run(scratch / "ckpt");
  c.images = 12;
  c.captions_per_image = 2;
  c.model_dim = 16;
  c.heads = 2;
  c.visual_layers = c.semantic_layers = c.decoder_layers = 1;
  c.epochs = 2;
  c.batch_size = 4;
  std::ostringstream log;
  std::string first;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(c.run_dir);
    prepare(c, log);
    app::run_train(c, log);
    const auto bytes = corpus::read_text_file(app::run_paths(c).checkpoint);
    if (round == 0) first = bytes;
    else return !first.empty() && bytes == first;
  }
  return false;
}

}  // namespace cosnet::acceptance
