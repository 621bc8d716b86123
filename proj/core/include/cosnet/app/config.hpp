#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cosnet/corpus/generator.hpp"
#include "cosnet/model/cosnet.hpp"
#include "cosnet/model/training.hpp"

namespace cosnet::app {

/// Flat run configuration; every field is one INI key of the same name.
struct RunConfig {
  std::string run_dir = "default";  // relative paths resolve under $COSNET_RUN_ROOT

  // corpus
  std::uint64_t corpus_seed = 1;
  std::size_t images = 100;
  std::size_t min_objects = 2;
  std::size_t max_objects = 3;
  std::size_t captions_per_image = 5;
  std::size_t object_types = 0;
  std::size_t attribute_types = 0;
  std::size_t relation_types = 0;
  std::size_t grid_side = 4;
  std::size_t feature_dim = 64;
  double feature_noise = 0.5;
  std::size_t embedding_dim = 64;
  std::uint64_t embedding_seed = 7;
  double embedding_noise = 0.35;

  // split
  std::string split_mode = "standard";  // standard | robust
  std::uint64_t split_seed = 1;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  double held_out_fraction = 0.2;

  // vocabularies and retrieval
  std::size_t min_count = 6;
  std::size_t semantic_vocab = 906;  // N_c target
  std::size_t retrieved = 5;         // K
  std::size_t max_cues = 20;         // N_r_max

  // model
  std::size_t model_dim = 512;
  std::size_t heads = 8;
  std::size_t visual_layers = 6;
  std::size_t semantic_layers = 3;
  std::size_t decoder_layers = 6;
  std::size_t slots = 16;
  std::size_t positions = 36;
  std::size_t max_length = 20;
  double gamma_pos = 0.0;
  double gamma_neg = 4.0;
  double asl_margin = 0.05;
  bool use_retrieval = true;
  bool use_filter_loss = true;
  bool use_missing_loss = true;
  bool use_ranker = true;

  // optimisation
  std::uint64_t seed = 1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::size_t warmup = 1000;
  double lr_factor = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  std::size_t checkpoint_every = 1;  // epochs

  // inference
  std::size_t beam = 3;
};

using FieldRef = std::variant<std::size_t RunConfig::*, double RunConfig::*, bool RunConfig::*,
                              std::string RunConfig::*>;

struct FieldInfo {
  const char* name;
  FieldRef ref;
  const char* help;
};

/// Every configurable field in canonical (serialisation) order.
const std::vector<FieldInfo>& config_fields();

/// Parses and assigns one field; ConfigError for unknown keys or bad values.
void set_field(RunConfig& config, const std::string& key, const std::string& value);
std::string get_field(const RunConfig& config, const FieldInfo& field);

/// INI-style "key = value" lines; '#' and ';' start comments, [section]
/// headers are accepted and ignored.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Canonical "key = value" text of every field.
std::string serialize_config(const RunConfig& config);
/// FNV-1a of the canonical serialisation.
std::uint64_t config_hash(const RunConfig& config);
std::string hash_hex(std::uint64_t hash);

/// Range checks across fields (positive dims, heads | model_dim, ...).
void validate_config(const RunConfig& config);

corpus::GeneratorConfig generator_config(const RunConfig& config);
model::ModelConfig model_config(const RunConfig& config, std::size_t word_vocab_size,
                                std::size_t semantic_vocab_size);
model::TrainerConfig trainer_config(const RunConfig& config);

}  // namespace cosnet::app
