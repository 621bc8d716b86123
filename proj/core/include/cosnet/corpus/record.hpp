#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cosnet/numerics/tensor.hpp"

namespace cosnet::corpus {

using Caption = std::vector<std::string>;

/// One image: features, reference captions and the canonical objects
/// present in the scene.
struct CorpusRecord {
  std::string image_id;
  Tensor<float> grid_features;   // N_I x D_in, row-major grid cells
  Tensor<float> global_feature;  // D_in
  std::vector<Caption> captions;
  std::set<std::string> gt_objects;
  /// Joint image/text space embedding supplied by an external encoder.
  std::optional<std::vector<float>> embedding;
};

}  // namespace cosnet::corpus
