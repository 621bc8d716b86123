#include "cosnet/app/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "cosnet/corpus/io.hpp"
#include "cosnet/numerics/errors.hpp"
#include "cosnet/numerics/random.hpp"

namespace cosnet::app {

const std::vector<FieldInfo>& config_fields() {
  using C = RunConfig;
  static const std::vector<FieldInfo> fields = {
      {"run_dir", &C::run_dir, "run directory (relative to $COSNET_RUN_ROOT)"},
      {"corpus_seed", &C::corpus_seed, "synthetic corpus seed"},
      {"images", &C::images, "number of synthetic images"},
      {"min_objects", &C::min_objects, "fewest objects per scene"},
      {"max_objects", &C::max_objects, "most objects per scene"},
      {"captions_per_image", &C::captions_per_image, "captions per image (1-5)"},
      {"object_types", &C::object_types, "object types drawn from (0 = all)"},
      {"attribute_types", &C::attribute_types, "attribute types drawn from (0 = all)"},
      {"relation_types", &C::relation_types, "relation types drawn from (0 = all)"},
      {"grid_side", &C::grid_side, "feature grid side (N_I = side^2)"},
      {"feature_dim", &C::feature_dim, "visual feature width D_in"},
      {"feature_noise", &C::feature_noise, "feature noise stddev"},
      {"embedding_dim", &C::embedding_dim, "retrieval embedding width"},
      {"embedding_seed", &C::embedding_seed, "retrieval embedding seed"},
      {"embedding_noise", &C::embedding_noise, "image embedding noise"},
      {"split_mode", &C::split_mode, "standard or robust"},
      {"split_seed", &C::split_seed, "split seed"},
      {"val_fraction", &C::val_fraction, "validation fraction (standard split)"},
      {"test_fraction", &C::test_fraction, "test fraction (standard split)"},
      {"held_out_fraction", &C::held_out_fraction, "held-out fraction (robust split)"},
      {"min_count", &C::min_count, "minimum word count for the caption vocabulary"},
      {"semantic_vocab", &C::semantic_vocab, "semantic vocabulary size N_c"},
      {"retrieved", &C::retrieved, "retrieved sentences K"},
      {"max_cues", &C::max_cues, "maximum semantic cues N_r"},
      {"model_dim", &C::model_dim, "hidden width D"},
      {"heads", &C::heads, "attention heads"},
      {"visual_layers", &C::visual_layers, "visual encoder blocks N_v"},
      {"semantic_layers", &C::semantic_layers, "comprehender blocks N_s"},
      {"decoder_layers", &C::decoder_layers, "decoder blocks N_d"},
      {"slots", &C::slots, "semantic query slots N_o"},
      {"positions", &C::positions, "position codebook rows N_p"},
      {"max_length", &C::max_length, "maximum caption length T_max"},
      {"gamma_pos", &C::gamma_pos, "asymmetric loss positive focusing"},
      {"gamma_neg", &C::gamma_neg, "asymmetric loss negative focusing"},
      {"asl_margin", &C::asl_margin, "asymmetric loss probability margin"},
      {"use_retrieval", &C::use_retrieval, "feed retrieved cues to the comprehender"},
      {"use_filter_loss", &C::use_filter_loss, "train the cue filter"},
      {"use_missing_loss", &C::use_missing_loss, "train the slot predictions"},
      {"use_ranker", &C::use_ranker, "apply the semantic ranker"},
      {"seed", &C::seed, "model initialisation and shuffling seed"},
      {"epochs", &C::epochs, "training epochs"},
      {"batch_size", &C::batch_size, "images per step"},
      {"warmup", &C::warmup, "learning-rate warmup steps"},
      {"lr_factor", &C::lr_factor, "learning-rate multiplier"},
      {"adam_beta1", &C::adam_beta1, "Adam beta1"},
      {"adam_beta2", &C::adam_beta2, "Adam beta2"},
      {"adam_eps", &C::adam_eps, "Adam epsilon"},
      {"checkpoint_every", &C::checkpoint_every, "epochs between checkpoints"},
      {"beam", &C::beam, "beam size"},
  };
  return fields;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const FieldInfo& find_field(const std::string& key) {
  for (const auto& f : config_fields()) {
    if (key == f.name) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
  const FieldInfo& field = find_field(key);
  const std::string v = trim(value);
  auto bad = [&](const char* what) { return ConfigError("key '" + key + "': '" + v + "' is not " + what); };
  std::visit(
      [&](auto member) {
        using M = std::remove_cvref_t<decltype(config.*member)>;
        if constexpr (std::is_same_v<M, std::size_t>) {
          std::size_t out = 0;
          auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
          if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw bad("a nonnegative integer");
          config.*member = out;
        } else if constexpr (std::is_same_v<M, double>) {
          std::istringstream in(v);
          double out = 0.0;
          in >> out;
          if (v.empty() || in.fail() || !in.eof()) throw bad("a number");
          config.*member = out;
        } else if constexpr (std::is_same_v<M, bool>) {
          if (v == "true" || v == "on" || v == "1" || v == "yes") {
            config.*member = true;
          } else if (v == "false" || v == "off" || v == "0" || v == "no") {
            config.*member = false;
          } else {
            throw bad("a boolean (true/false/on/off)");
          }
        } else {
          config.*member = v;
        }
      },
      field.ref);
}

std::string get_field(const RunConfig& config, const FieldInfo& field) {
  return std::visit(
      [&](auto member) -> std::string {
        using M = std::remove_cvref_t<decltype(config.*member)>;
        if constexpr (std::is_same_v<M, std::size_t>) {
          return std::to_string(config.*member);
        } else if constexpr (std::is_same_v<M, double>) {
          return format_double(config.*member);
        } else if constexpr (std::is_same_v<M, bool>) {
          return config.*member ? "true" : "false";
        } else {
          return config.*member;
        }
      },
      field.ref);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_field(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::string text;
  try {
    text = corpus::read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read configuration file " + path.string());
  }
  return parse_config(text, std::move(base));
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : config_fields()) out += std::string(f.name) + " = " + get_field(config, f) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(serialize_config(config)); }

std::string hash_hex(std::uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return buf;
}

void validate_config(const RunConfig& c) {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(c.images, "images");
  positive(c.captions_per_image, "captions_per_image");
  positive(c.grid_side, "grid_side");
  positive(c.feature_dim, "feature_dim");
  positive(c.embedding_dim, "embedding_dim");
  positive(c.min_count, "min_count");
  positive(c.semantic_vocab, "semantic_vocab");
  positive(c.retrieved, "retrieved");
  positive(c.max_cues, "max_cues");
  positive(c.model_dim, "model_dim");
  positive(c.heads, "heads");
  positive(c.visual_layers, "visual_layers");
  positive(c.semantic_layers, "semantic_layers");
  positive(c.decoder_layers, "decoder_layers");
  positive(c.slots, "slots");
  positive(c.positions, "positions");
  positive(c.max_length, "max_length");
  positive(c.batch_size, "batch_size");
  positive(c.warmup, "warmup");
  positive(c.beam, "beam");
  positive(c.checkpoint_every, "checkpoint_every");
  if (c.model_dim % c.heads != 0) throw ConfigError("heads must divide model_dim");
  if (c.captions_per_image > 5) throw ConfigError("captions_per_image must be at most 5");
  if (c.min_objects == 0 || c.min_objects > c.max_objects) {
    throw ConfigError("objects per scene must satisfy 1 <= min_objects <= max_objects");
  }
  if (c.split_mode != "standard" && c.split_mode != "robust") {
    throw ConfigError("split_mode must be 'standard' or 'robust'");
  }
  if (c.val_fraction < 0 || c.test_fraction < 0 || c.val_fraction + c.test_fraction >= 1) {
    throw ConfigError("val_fraction + test_fraction must lie in [0, 1)");
  }
  if (!(c.held_out_fraction > 0 && c.held_out_fraction < 1)) throw ConfigError("held_out_fraction must lie in (0, 1)");
  if (c.lr_factor <= 0) throw ConfigError("lr_factor must be positive");
  if (c.adam_beta1 < 0 || c.adam_beta1 >= 1 || c.adam_beta2 < 0 || c.adam_beta2 >= 1 || c.adam_eps <= 0) {
    throw ConfigError("Adam needs betas in [0, 1) and a positive epsilon");
  }
  if (c.gamma_pos < 0 || c.gamma_neg < 0 || c.asl_margin < 0 || c.asl_margin >= 1) {
    throw ConfigError("asymmetric loss needs gamma >= 0 and margin in [0, 1)");
  }
}

corpus::GeneratorConfig generator_config(const RunConfig& c) {
  corpus::GeneratorConfig g;
  g.seed = c.corpus_seed;
  g.images = c.images;
  g.min_objects = c.min_objects;
  g.max_objects = c.max_objects;
  g.captions_per_image = c.captions_per_image;
  g.object_types = c.object_types;
  g.attribute_types = c.attribute_types;
  g.relation_types = c.relation_types;
  g.grid_side = c.grid_side;
  g.feature_dim = c.feature_dim;
  g.feature_noise = c.feature_noise;
  g.embedding_dim = c.embedding_dim;
  g.embedding_seed = c.embedding_seed;
  g.embedding_noise = c.embedding_noise;
  return g;
}

model::ModelConfig model_config(const RunConfig& c, std::size_t word_vocab_size, std::size_t semantic_vocab_size) {
  model::ModelConfig m;
  m.feature_dim = c.feature_dim;
  m.model_dim = c.model_dim;
  m.heads = c.heads;
  m.visual_layers = c.visual_layers;
  m.semantic_layers = c.semantic_layers;
  m.decoder_layers = c.decoder_layers;
  m.slots = c.slots;
  m.positions = c.positions;
  m.max_length = c.max_length;
  m.word_vocab_size = word_vocab_size;
  m.semantic_vocab_size = semantic_vocab_size;
  m.use_retrieval = c.use_retrieval;
  m.use_filter_loss = c.use_filter_loss;
  m.use_missing_loss = c.use_missing_loss;
  m.use_ranker = c.use_ranker;
  m.asl = {c.gamma_pos, c.gamma_neg, c.asl_margin};
  return m;
}

model::TrainerConfig trainer_config(const RunConfig& c) {
  model::TrainerConfig t;
  t.batch_size = c.batch_size;
  t.warmup = static_cast<std::int64_t>(c.warmup);
  t.lr_factor = c.lr_factor;
  t.shuffle_seed = derive_seed(c.seed, 0x5348554646ULL);
  t.adam = {c.adam_beta1, c.adam_beta2, c.adam_eps};
  return t;
}

}  // namespace cosnet::app
