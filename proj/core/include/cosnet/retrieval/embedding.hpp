#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::retrieval {

enum class EmbeddingSource { image, sentence };

struct EmbeddingVector {
  std::vector<float> values;
  EmbeddingSource source = EmbeddingSource::sentence;
};

/// Deterministic stand-in for a joint image/text encoder.
///
/// Sentences embed as the L2-normalised sum of per-word Gaussian vectors,
/// each drawn from a stream keyed by (seed, word). Images either pass a
/// precomputed embedding through or project their mean grid feature with a
/// seeded Gaussian matrix.
class EmbeddingProvider {
 public:
  EmbeddingProvider(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }

  EmbeddingVector embed_image(const corpus::CorpusRecord& record) const;
  EmbeddingVector embed_sentence(std::span<const std::string> tokens) const;
  /// Unnormalised random direction for a single word.
  std::vector<float> word_vector(std::string_view word) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// u . v / (|u| |v|); throws ContractError on a zero vector.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Scales to unit L2 norm; throws ContractError when the norm is zero.
void normalize_in_place(std::vector<float>& values);

}  // namespace cosnet::retrieval
