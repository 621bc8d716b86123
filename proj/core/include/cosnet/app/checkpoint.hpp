#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cosnet/model/cosnet.hpp"
#include "cosnet/numerics/optim.hpp"

namespace cosnet::app {

// Binary layout, all integers little-endian:
//
//   magic        8 bytes  "COSNETCK"
//   version      u32
//   config_hash  u64
//   step         u64      optimizer updates applied
//   epoch        u64      completed epochs
//   entry_count  u32
//   entry table  per entry: u32 name length, name bytes (UTF-8),
//                           u32 rank, u64 dims[rank]
//   payloads     per entry in table order: prod(dims) float32 values
//
// Parameters come first in store order, then "adam.m/<name>" and
// "adam.v/<name>" when optimizer state is present.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::vector<CheckpointEntry> entries;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws DataError on a bad magic, version or truncated payload.
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Snapshot of parameters and, when given, Adam moments.
Checkpoint capture_checkpoint(const model::CosNetModel<float>& model, const Adam* optimizer,
                              std::uint64_t config_hash, std::uint64_t epoch);

/// Copies parameters (and Adam state when `optimizer` is given) back. Every
/// parameter must be present with a matching shape.
void restore_checkpoint(model::CosNetModel<float>& model, Adam* optimizer, const Checkpoint& checkpoint);

}  // namespace cosnet::app
