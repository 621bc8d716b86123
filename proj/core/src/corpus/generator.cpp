#include "cosnet/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cosnet/corpus/tokenize.hpp"
#include "cosnet/numerics/errors.hpp"
#include "cosnet/numerics/random.hpp"
#include "cosnet/retrieval/embedding.hpp"

namespace cosnet::corpus {

namespace {

struct ObjectEntry {
  const char* canonical;
  std::vector<const char*> forms;    // first form is the canonical rendering
  std::vector<const char*> plurals;  // lexicon only
};

const std::vector<ObjectEntry>& object_table() {
  static const std::vector<ObjectEntry> table = {
      {"person", {"person", "man", "woman"}, {"people", "men", "women"}},
      {"dog", {"dog", "puppy"}, {"dogs", "puppies"}},
      {"cat", {"cat", "kitten"}, {"cats", "kittens"}},
      {"horse", {"horse", "pony"}, {"horses", "ponies"}},
      {"cow", {"cow"}, {"cows"}},
      {"sheep", {"sheep"}, {}},
      {"bird", {"bird"}, {"birds"}},
      {"airplane", {"plane", "airplane", "jet"}, {"planes", "airplanes", "jets"}},
      {"car", {"car"}, {"cars"}},
      {"bus", {"bus"}, {"buses"}},
      {"train", {"train"}, {"trains"}},
      {"boat", {"boat", "ship"}, {"boats", "ships"}},
      {"bicycle", {"bicycle", "bike"}, {"bicycles", "bikes"}},
      {"traffic light", {"traffic light", "stoplight"}, {"traffic lights", "stoplights"}},
      {"fire hydrant", {"fire hydrant", "hydrant"}, {"fire hydrants", "hydrants"}},
      {"bench", {"bench"}, {"benches"}},
      {"umbrella", {"umbrella"}, {"umbrellas"}},
      {"kite", {"kite"}, {"kites"}},
      {"clock", {"clock"}, {"clocks"}},
      {"elephant", {"elephant"}, {"elephants"}},
      {"giraffe", {"giraffe"}, {"giraffes"}},
      {"zebra", {"zebra"}, {"zebras"}},
      {"smoke", {"smoke"}, {}},
      {"tree", {"tree"}, {"trees"}},
  };
  return table;
}

const std::vector<const char*>& attribute_table() {
  static const std::vector<const char*> table = {"red",   "blue",  "green", "yellow", "white",
                                                 "black", "small", "large", "gray",   "brown"};
  return table;
}

struct RelationEntry {
  const char* phrase;
  const char* inverse;
};

const std::vector<RelationEntry>& relation_table() {
  static const std::vector<RelationEntry> table = {
      {"near", "near"},   {"beside", "beside"},      {"above", "below"},
      {"on", "under"},    {"behind", "in front of"}, {"next to", "next to"},
  };
  return table;
}

std::size_t limit(std::size_t requested, std::size_t available) {
  return requested == 0 ? available : std::min(requested, available);
}

std::vector<float> code_vector(std::uint64_t seed, const std::string& key, std::size_t dim) {
  Rng rng(derive_seed(seed, fnv1a64(key)));
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

struct SceneObject {
  std::size_t object;
  std::size_t attribute;
};

void append_words(Caption& out, std::string_view phrase) {
  for (auto& t : tokenize(phrase)) out.push_back(std::move(t));
}

void append_noun_phrase(Caption& out, const char* adjective, const char* noun) {
  const char* head = adjective ? adjective : noun;
  const char first = head[0];
  const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
  out.push_back(vowel ? "an" : "a");
  if (adjective) out.push_back(adjective);
  append_words(out, noun);
}

Caption render_caption(std::size_t variant, const std::vector<SceneObject>& scene, std::size_t relation,
                       Rng& rng) {
  const auto& objects = object_table();
  const auto& attributes = attribute_table();
  const auto& rel = relation_table()[relation];
  auto form = [&](std::size_t i) -> const char* {
    const auto& forms = objects[scene[i].object].forms;
    return variant == 0 ? forms.front() : forms[rng.below(forms.size())];
  };
  auto adjective = [&](std::size_t i) { return attributes[scene[i].attribute]; };
  const bool with_adjectives = variant != 1;

  std::vector<std::size_t> order(scene.size());
  std::iota(order.begin(), order.end(), 0);
  const char* link = rel.phrase;
  if (variant == 2 && scene.size() >= 2) {
    std::swap(order[0], order[1]);
    link = rel.inverse;
  }
  if (variant == 4) link = "and";

  Caption c;
  if (variant == 3) {
    c.push_back("there");
    c.push_back("is");
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (k == 1) append_words(c, link);
    if (k >= 2) c.push_back("and");
    append_noun_phrase(c, with_adjectives ? adjective(i) : nullptr, form(i));
  }
  return c;
}

}  // namespace

std::vector<std::string> generator_objects() {
  std::vector<std::string> out;
  for (const auto& e : object_table()) out.emplace_back(e.canonical);
  return out;
}

std::vector<std::string> generator_attributes() {
  return {attribute_table().begin(), attribute_table().end()};
}

std::vector<std::string> generator_relations() {
  std::vector<std::string> out;
  for (const auto& r : relation_table()) out.emplace_back(r.phrase);
  return out;
}

ObjectLexicon generator_lexicon() {
  ObjectLexicon lexicon;
  for (const auto& e : object_table()) {
    for (const char* f : e.forms) lexicon.add(f, e.canonical);
    for (const char* f : e.plurals) lexicon.add(f, e.canonical);
  }
  return lexicon;
}

std::vector<CorpusRecord> generate_corpus(const GeneratorConfig& config) {
  if (config.images == 0) throw ContractError("generate_corpus needs at least one image");
  if (config.min_objects == 0 || config.min_objects > config.max_objects) {
    throw ContractError("objects per scene must satisfy 1 <= min <= max");
  }
  if (config.captions_per_image == 0 || config.captions_per_image > 5) {
    throw ContractError("captions per image must lie in [1, 5]");
  }
  if (config.grid_side == 0 || config.feature_dim == 0 || config.embedding_dim == 0) {
    throw ContractError("grid side and feature dimensions must be positive");
  }
  const std::size_t n_objects = limit(config.object_types, object_table().size());
  const std::size_t n_attributes = limit(config.attribute_types, attribute_table().size());
  const std::size_t n_relations = limit(config.relation_types, relation_table().size());
  if (n_objects < config.max_objects) {
    throw ContractError("vocabulary spec has " + std::to_string(n_objects) + " object types but scenes need up to " +
                        std::to_string(config.max_objects) + " distinct objects");
  }
  const std::size_t cells = config.grid_side * config.grid_side;
  if (cells < config.max_objects) throw ContractError("grid too small for the requested scene size");

  const std::size_t d = config.feature_dim;
  std::vector<std::vector<float>> object_codes, attribute_codes, relation_codes;
  for (std::size_t i = 0; i < n_objects; ++i) {
    object_codes.push_back(code_vector(config.seed, std::string("object:") + object_table()[i].canonical, d));
  }
  for (std::size_t i = 0; i < n_attributes; ++i) {
    attribute_codes.push_back(code_vector(config.seed, std::string("attribute:") + attribute_table()[i], d));
  }
  for (std::size_t i = 0; i < n_relations; ++i) {
    relation_codes.push_back(code_vector(config.seed, std::string("relation:") + relation_table()[i].phrase, d));
  }
  const retrieval::EmbeddingProvider embedder(config.embedding_dim, config.embedding_seed);

  std::vector<CorpusRecord> records;
  records.reserve(config.images);
  for (std::size_t index = 0; index < config.images; ++index) {
    Rng rng(derive_seed(config.seed, index));
    const std::size_t k = config.min_objects + rng.below(config.max_objects - config.min_objects + 1);

    std::vector<std::size_t> pool(n_objects);
    std::iota(pool.begin(), pool.end(), 0);
    rng.shuffle(pool);
    std::vector<SceneObject> scene;
    for (std::size_t i = 0; i < k; ++i) scene.push_back({pool[i], rng.below(n_attributes)});
    const std::size_t relation = rng.below(n_relations);

    CorpusRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "img%05zu", index);
    r.image_id = id;

    // Each object claims a run of cells from a shuffled layout.
    std::vector<std::size_t> layout(cells);
    std::iota(layout.begin(), layout.end(), 0);
    rng.shuffle(layout);
    const std::size_t per_object = std::max<std::size_t>(1, std::min<std::size_t>(4, cells / k));
    Tensor<float> grid({cells, d});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t extent = 1 + rng.below(per_object);
      for (std::size_t c = 0; c < extent; ++c) {
        auto row = grid.row(layout[i * per_object + c]);
        for (std::size_t j = 0; j < d; ++j) {
          row[j] += object_codes[scene[i].object][j] + 0.7f * attribute_codes[scene[i].attribute][j];
        }
      }
    }
    for (auto& x : grid.values()) x += static_cast<float>(config.feature_noise * rng.normal());

    Tensor<float> global({d});
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (const auto& o : scene) acc += object_codes[o.object][j] + 0.7 * attribute_codes[o.attribute][j];
      global[j] = static_cast<float>(acc / static_cast<double>(k) + relation_codes[relation][j] +
                                     config.feature_noise * rng.normal());
    }
    r.grid_features = std::move(grid);
    r.global_feature = std::move(global);

    for (std::size_t v = 0; v < config.captions_per_image; ++v) {
      r.captions.push_back(render_caption(v, scene, relation, rng));
    }
    for (const auto& o : scene) r.gt_objects.insert(object_table()[o.object].canonical);

    // Joint-space embedding aligned with the scene's content words.
    std::vector<float> e(config.embedding_dim, 0.0f);
    auto add_words = [&](std::string_view phrase) {
      for (const auto& w : tokenize(phrase)) {
        const auto wv = embedder.word_vector(w);
        for (std::size_t j = 0; j < e.size(); ++j) e[j] += wv[j];
      }
    };
    for (const auto& o : scene) {
      add_words(object_table()[o.object].forms.front());
      add_words(attribute_table()[o.attribute]);
    }
    add_words(relation_table()[relation].phrase);
    retrieval::normalize_in_place(e);
    const double sigma = config.embedding_noise / std::sqrt(static_cast<double>(e.size()));
    for (auto& x : e) x += static_cast<float>(sigma * rng.normal());
    retrieval::normalize_in_place(e);
    r.embedding = std::move(e);

    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace cosnet::corpus
