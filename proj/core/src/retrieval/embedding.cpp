#include "cosnet/retrieval/embedding.hpp"

#include <cmath>

#include "cosnet/numerics/random.hpp"

namespace cosnet::retrieval {

namespace {
constexpr std::uint64_t kImageStream = 0x1a2b3c4dULL;
}

EmbeddingProvider::EmbeddingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw ContractError("embedding dimension must be positive");
}

void normalize_in_place(std::vector<float>& values) {
  double norm = 0.0;
  for (float v : values) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ContractError("cannot normalise a zero-norm embedding");
  for (float& v : values) v = static_cast<float>(v / norm);
}

std::vector<float> EmbeddingProvider::word_vector(std::string_view word) const {
  Rng rng(derive_seed(seed_, fnv1a64(word)));
  std::vector<float> out(dim_);
  for (auto& v : out) v = static_cast<float>(rng.normal());
  return out;
}

EmbeddingVector EmbeddingProvider::embed_sentence(std::span<const std::string> tokens) const {
  if (tokens.empty()) throw ContractError("embed_sentence: empty token list");
  std::vector<double> acc(dim_, 0.0);
  for (const auto& t : tokens) {
    const auto w = word_vector(t);
    for (std::size_t i = 0; i < dim_; ++i) acc[i] += w[i];
  }
  EmbeddingVector out{std::vector<float>(acc.begin(), acc.end()), EmbeddingSource::sentence};
  normalize_in_place(out.values);
  return out;
}

EmbeddingVector EmbeddingProvider::embed_image(const corpus::CorpusRecord& record) const {
  if (record.embedding) {
    if (record.embedding->size() != dim_) {
      throw ContractError("embed_image: precomputed embedding of '" + record.image_id + "' has dimension " +
                          std::to_string(record.embedding->size()) + ", expected " + std::to_string(dim_));
    }
    EmbeddingVector out{*record.embedding, EmbeddingSource::image};
    normalize_in_place(out.values);
    return out;
  }
  const Tensor<float>& grid = record.grid_features;
  if (grid.empty()) throw ContractError("embed_image: record '" + record.image_id + "' has no grid features");
  const std::size_t cells = grid.rows(), in_dim = grid.cols();
  std::vector<double> mean(in_dim, 0.0);
  for (std::size_t r = 0; r < cells; ++r)
    for (std::size_t c = 0; c < in_dim; ++c) mean[c] += grid(r, c);
  for (auto& v : mean) v /= static_cast<double>(cells);

  Rng rng(derive_seed(seed_, kImageStream));
  std::vector<double> acc(dim_, 0.0);
  for (std::size_t c = 0; c < in_dim; ++c) {
    for (std::size_t j = 0; j < dim_; ++j) acc[j] += mean[c] * rng.normal();
  }
  EmbeddingVector out{std::vector<float>(acc.begin(), acc.end()), EmbeddingSource::image};
  try {
    normalize_in_place(out.values);
  } catch (const ContractError&) {
    throw ContractError("embed_image: record '" + record.image_id + "' has all-zero features");
  }
  return out;
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw ShapeError("cosine_similarity: dimensions " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()) + " differ");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (!(nu > 0.0) || !(nv > 0.0)) throw ContractError("cosine_similarity: zero vector");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine_similarity(std::span<const float>(u.values), std::span<const float>(v.values));
}

}  // namespace cosnet::retrieval
