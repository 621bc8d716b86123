#include "cosnet/app/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_map>

#include "cosnet/corpus/io.hpp"
#include "cosnet/numerics/errors.hpp"

namespace cosnet::app {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'S', 'N', 'E', 'T', 'C', 'K'};

template <typename U>
void put(std::string& out, U value) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(U));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    unsigned char raw[sizeof(U)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(U));
    pos_ += sizeof(U);
    U v;
    std::memcpy(&v, raw, sizeof(U));
    return v;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, c.version);
  put<std::uint64_t>(out, c.config_hash);
  put<std::uint64_t>(out, c.step);
  put<std::uint64_t>(out, c.epoch);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.entries.size()));
  for (const auto& e : c.entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) put<std::uint64_t>(out, d);
  }
  for (const auto& e : c.entries) {
    if (e.values.size() != shape_numel(e.shape)) throw ContractError("checkpoint entry " + e.name + " size mismatch");
    for (float v : e.values) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError("not a checkpoint (bad magic bytes)");
  }
  Reader in(bytes);
  in.get_string(sizeof kMagic);
  Checkpoint c;
  c.version = in.get<std::uint32_t>();
  if (c.version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(c.version));
  }
  c.config_hash = in.get<std::uint64_t>();
  c.step = in.get<std::uint64_t>();
  c.epoch = in.get<std::uint64_t>();
  const auto count = in.get<std::uint32_t>();
  c.entries.resize(count);
  for (auto& e : c.entries) {
    e.name = in.get_string(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < rank; ++i) e.shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>()));
  }
  for (auto& e : c.entries) {
    e.values.resize(shape_numel(e.shape));
    for (auto& v : e.values) v = std::bit_cast<float>(in.get<std::uint32_t>());
  }
  if (!in.done()) throw DataError("checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  corpus::write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return parse_checkpoint(corpus::read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Checkpoint capture_checkpoint(const model::CosNetModel<float>& model, const Adam* optimizer,
                              std::uint64_t config_hash, std::uint64_t epoch) {
  Checkpoint c;
  c.config_hash = config_hash;
  c.epoch = epoch;
  const auto& store = model.parameters();
  for (const auto& p : store) {
    c.entries.push_back({p.name, p.value.shape(), {p.value.values().begin(), p.value.values().end()}});
  }
  if (optimizer != nullptr) {
    c.step = static_cast<std::uint64_t>(optimizer->steps());
    const Adam& adam = *optimizer;
    if (!adam.first_moments().empty()) {
      for (std::size_t i = 0; i < store.count(); ++i) {
        const auto& m = adam.first_moments()[i];
        c.entries.push_back({"adam.m/" + store.at(i).name, m.shape(), {m.values().begin(), m.values().end()}});
      }
      for (std::size_t i = 0; i < store.count(); ++i) {
        const auto& v = adam.second_moments()[i];
        c.entries.push_back({"adam.v/" + store.at(i).name, v.shape(), {v.values().begin(), v.values().end()}});
      }
    }
  }
  return c;
}

void restore_checkpoint(model::CosNetModel<float>& model, Adam* optimizer, const Checkpoint& checkpoint) {
  std::unordered_map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : checkpoint.entries) by_name.emplace(e.name, &e);
  auto lookup = [&](const std::string& name, const Shape& shape) -> const CheckpointEntry& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint lacks entry " + name);
    if (it->second->shape != shape) {
      throw DataError("checkpoint entry " + name + " has shape " + shape_to_string(it->second->shape) +
                      ", model expects " + shape_to_string(shape));
    }
    return *it->second;
  };
  auto& store = model.parameters();
  for (auto& p : store) {
    const auto& e = lookup(p.name, p.value.shape());
    std::copy(e.values.begin(), e.values.end(), p.value.values().begin());
  }
  if (optimizer != nullptr && by_name.contains("adam.m/" + store.at(0).name)) {
    std::vector<Tensor<float>> m, v;
    for (auto& p : store) {
      m.emplace_back(p.value.shape(), lookup("adam.m/" + p.name, p.value.shape()).values);
      v.emplace_back(p.value.shape(), lookup("adam.v/" + p.name, p.value.shape()).values);
    }
    optimizer->restore(static_cast<std::int64_t>(checkpoint.step), std::move(m), std::move(v));
  }
}

}  // namespace cosnet::app
