#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cosnet/app/checkpoint.hpp"
#include "cosnet/app/config.hpp"
#include "cosnet/app/pipeline.hpp"
#include "fixtures.hpp"

namespace cosnet::app {
namespace {

namespace fs = std::filesystem;

TEST(Config, ParseSerializeRoundTrip) {
  RunConfig c;
  c.images = 17;
  c.lr_factor = 0.25;
  c.use_ranker = false;
  c.split_mode = "robust";
  const auto back = parse_config(serialize_config(c));
  EXPECT_EQ(serialize_config(back), serialize_config(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, IniSyntax) {
  const auto c = parse_config("# comment\n[model]\nmodel_dim = 32 ; trailing\n\nheads=4\nuse_retrieval = false\n");
  EXPECT_EQ(c.model_dim, 32u);
  EXPECT_EQ(c.heads, 4u);
  EXPECT_FALSE(c.use_retrieval);
  EXPECT_THROW(parse_config("no_such_key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("images = many\n"), ConfigError);
  EXPECT_THROW(parse_config("images\n"), ConfigError);
  EXPECT_THROW(parse_config("use_ranker = maybe\n"), ConfigError);
}

TEST(Config, EveryFieldMovesTheHash) {
  const RunConfig base;
  const auto h0 = config_hash(base);
  for (const auto& f : config_fields()) {
    RunConfig c = base;
    std::visit(
        [&](auto member) {
          using V = std::decay_t<decltype(c.*member)>;
          if constexpr (std::is_same_v<V, bool>) c.*member = !(c.*member);
          else if constexpr (std::is_same_v<V, std::string>) c.*member += "x";
          else c.*member = c.*member + 1;
        },
        f.ref);
    EXPECT_NE(config_hash(c), h0) << f.name;
  }
}

TEST(Config, ValidationRejectsBadCombinations) {
  EXPECT_NO_THROW(validate_config(RunConfig{}));
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    return c;
  };
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.heads = 7; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.images = 0; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.split_mode = "random"; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.val_fraction = 0.6; c.test_fraction = 0.5; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.captions_per_image = 6; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.min_objects = 4; })), ConfigError);
  EXPECT_THROW(validate_config(bad([](RunConfig& c) { c.adam_beta2 = 1.0; })), ConfigError);
}

model::CosNetModel<float> small_model() {
  return model::CosNetModel<float>(testing::tiny_config(12, 6), 3);
}

TEST(Checkpoint, SerializeParseRoundTrip) {
  auto m = small_model();
  const auto ck = capture_checkpoint(m, nullptr, 0xabcdef, 4);
  const auto bytes = serialize_checkpoint(ck);
  EXPECT_EQ(bytes.substr(0, 8), "COSNETCK");
  const auto back = parse_checkpoint(bytes);
  EXPECT_EQ(back.config_hash, 0xabcdefu);
  EXPECT_EQ(back.epoch, 4u);
  ASSERT_EQ(back.entries.size(), m.parameters().count());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].name, m.parameters().at(i).name);
    EXPECT_EQ(back.entries[i].shape, m.parameters().at(i).value.shape());
    EXPECT_EQ(back.entries[i].values, ck.entries[i].values);
  }
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptBytesAreDataErrors) {
  auto m = small_model();
  const auto bytes = serialize_checkpoint(capture_checkpoint(m, nullptr, 1, 0));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bad_magic), DataError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, 10)), DataError);
  auto bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(parse_checkpoint(bad_version), DataError);
}

TEST(Checkpoint, RestoresParametersAndAdamState) {
  Rng rng(2);
  const auto cfg = testing::tiny_config(12, 6);
  model::CosNetModel<float> a(cfg, 3);
  model::TrainingExample ex;
  ex.image = testing::random_image(cfg, rng, 4, 2);
  ex.captions = {{4, 5}};
  ex.semantic_words = {1};
  model::Trainer ta(a, model::TrainerConfig{});
  const model::TrainingExample* batch[] = {&ex};
  ta.train_step(batch);
  ta.train_step(batch);
  const auto ck = parse_checkpoint(serialize_checkpoint(capture_checkpoint(a, &ta.optimizer(), 5, 2)));
  EXPECT_EQ(ck.step, 2u);
  EXPECT_EQ(ck.entries.size(), 3 * a.parameters().count());

  model::CosNetModel<float> b(cfg, 99);
  model::Trainer tb(b, model::TrainerConfig{});
  restore_checkpoint(b, &tb.optimizer(), ck);
  EXPECT_EQ(tb.step(), 2);
  for (std::size_t i = 0; i < a.parameters().count(); ++i)
    EXPECT_EQ(a.parameters().at(i).value, b.parameters().at(i).value);
  // Identical state, identical next update.
  ta.train_step(batch);
  tb.train_step(batch);
  for (std::size_t i = 0; i < a.parameters().count(); ++i)
    EXPECT_EQ(a.parameters().at(i).value, b.parameters().at(i).value);

  auto partial = ck;
  partial.entries.erase(partial.entries.begin());
  EXPECT_THROW(restore_checkpoint(b, nullptr, partial), DataError);
}

RunConfig tiny_run(const fs::path& dir) {
  RunConfig c;
  c.run_dir = dir.string();
  c.images = 10;
  c.captions_per_image = 2;
  c.min_count = 1;
  c.semantic_vocab = 40;
  c.feature_dim = 8;
  c.embedding_dim = 8;
  c.model_dim = 8;
  c.heads = 2;
  c.visual_layers = c.semantic_layers = c.decoder_layers = 1;
  c.slots = 2;
  c.positions = 4;
  c.max_length = 8;
  c.epochs = 1;
  c.batch_size = 4;
  c.val_fraction = 0.2;
  c.test_fraction = 0.2;
  return c;
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg = tiny_run(dir.path());
    run_gen_corpus(cfg, log);
    run_build_vocab(cfg, log);
    run_build_index(cfg, log);
  }
  testing::TempDir dir{"pipeline"};
  RunConfig cfg;
  std::ostringstream log;
};

TEST_F(Pipeline, TrainCaptionEvaluate) {
  const auto summary = run_train(cfg, log);
  EXPECT_EQ(summary.epochs, 1u);
  EXPECT_FALSE(fs::exists(run_paths(cfg).lock));
  EXPECT_TRUE(fs::exists(run_paths(cfg).checkpoint));
  const auto path = run_caption(cfg, "val", log);
  const auto captions = read_captions(path);
  EXPECT_EQ(captions.size(), load_run_data(cfg).section("val").size());
  const auto report = run_evaluate(cfg, "val", path, log);
  EXPECT_EQ(report.images, captions.size());
  EXPECT_THROW(run_caption(cfg, "holdout", log), ConfigError);
}

TEST_F(Pipeline, LockedRunDirectoryRefusesTraining) {
  std::ofstream(run_paths(cfg).lock) << "1234\n";
  EXPECT_THROW(run_train(cfg, log), DataError);
  EXPECT_TRUE(fs::exists(run_paths(cfg).lock));
}

TEST_F(Pipeline, CaptionRefusesAChangedConfig) {
  run_train(cfg, log);
  auto other = cfg;
  other.beam = 2;
  try {
    run_caption(other, "val", log);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hash"), std::string::npos);
  }
}

TEST_F(Pipeline, EvaluateNamesMissingCaptions) {
  run_train(cfg, log);
  const auto path = run_caption(cfg, "val", log);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  in.close();
  std::ofstream(path) << first << "\n";
  EXPECT_THROW(run_evaluate(cfg, "val", path, log), DataError);
}

TEST_F(Pipeline, MissingInputsNameTheProducer) {
  fs::remove(run_paths(cfg).pool);
  try {
    run_train(cfg, log);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("build-index"), std::string::npos) << e.what();
  }
}

TEST(RunPaths, RelativeDirsResolveUnderRoot) {
  RunConfig c;
  c.run_dir = "exp1";
  ::setenv("COSNET_RUN_ROOT", "/tmp/cosnet-root", 1);
  EXPECT_EQ(run_paths(c).dir, fs::path("/tmp/cosnet-root/exp1"));
  c.run_dir = "/abs/run";
  EXPECT_EQ(run_paths(c).dir, fs::path("/abs/run"));
  ::unsetenv("COSNET_RUN_ROOT");
  c.run_dir = "exp1";
  EXPECT_EQ(run_paths(c).dir, fs::path("runs/exp1"));
  EXPECT_EQ(run_paths(c).captions("val").filename(), fs::path("captions_val.tsv"));
}

}  // namespace
}  // namespace cosnet::app
