#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cosnet/corpus/lexicon.hpp"
#include "cosnet/corpus/record.hpp"

namespace cosnet::corpus {

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t images = 100;
  std::size_t min_objects = 2;
  std::size_t max_objects = 3;
  std::size_t captions_per_image = 5;
  // Vocabulary spec: how many entries of the built-in tables to draw from
  // (0 = all of them).
  std::size_t object_types = 0;
  std::size_t attribute_types = 0;
  std::size_t relation_types = 0;
  std::size_t grid_side = 4;  // N_I = grid_side^2
  std::size_t feature_dim = 64;
  double feature_noise = 0.5;
  std::size_t embedding_dim = 64;
  std::uint64_t embedding_seed = 7;
  double embedding_noise = 0.35;
};

/// Scenes of (attribute, object) pairs linked by a relation, rendered into
/// grid features and template captions ("a ADJ OBJ REL a ADJ OBJ", ...).
/// Each record draws from its own stream derived from seed + index.
std::vector<CorpusRecord> generate_corpus(const GeneratorConfig& config);

/// Lexicon covering every object the generator can emit (surface forms
/// plus plurals).
ObjectLexicon generator_lexicon();

/// Names of the built-in object, attribute and relation tables.
std::vector<std::string> generator_objects();
std::vector<std::string> generator_attributes();
std::vector<std::string> generator_relations();

}  // namespace cosnet::corpus
