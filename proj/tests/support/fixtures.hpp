#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "cosnet/model/cosnet.hpp"
#include "cosnet/numerics/random.hpp"
#include "cosnet/numerics/tensor.hpp"

namespace cosnet::testing {

template <std::floating_point T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double stddev = 1.0) {
  Tensor<T> t(std::move(shape));
  for (auto& x : t.values()) x = static_cast<T>(stddev * rng.normal());
  return t;
}

/// Smallest model that still exercises every component.
inline model::ModelConfig tiny_config(std::size_t word_vocab, std::size_t semantic_classes) {
  model::ModelConfig c;
  c.feature_dim = 6;
  c.model_dim = 8;
  c.heads = 2;
  c.visual_layers = 1;
  c.semantic_layers = 1;
  c.decoder_layers = 1;
  c.slots = 2;
  c.positions = 4;
  c.max_length = 8;
  c.word_vocab_size = word_vocab;
  c.semantic_vocab_size = semantic_classes;
  return c;
}

inline model::ImageInput random_image(const model::ModelConfig& c, Rng& rng, std::size_t grid_cells,
                                      std::size_t cues) {
  model::ImageInput in;
  in.global = random_tensor<float>({c.feature_dim}, rng);
  in.grid = random_tensor<float>({grid_cells, c.feature_dim}, rng);
  for (std::size_t i = 0; i < cues; ++i) in.cues.push_back(rng.below(c.semantic_vocab_size - 1));
  return in;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("cosnet_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace cosnet::testing
