#include "cosnet/corpus/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cosnet/numerics/errors.hpp"

namespace cosnet::corpus {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

ordered_json floats_to_json(std::span<const float> values) {
  auto arr = ordered_json::array();
  for (float v : values) arr.push_back(static_cast<double>(v));
  return arr;
}

std::vector<float> json_to_floats(const ordered_json& arr, const char* field) {
  if (!arr.is_array()) throw DataError(std::string("field '") + field + "' must be an array");
  std::vector<float> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.push_back(static_cast<float>(v.get<double>()));
  return out;
}

}  // namespace

std::string record_to_json_line(const CorpusRecord& record) {
  ordered_json j;
  j["image_id"] = record.image_id;
  j["global_feature"] = floats_to_json(record.global_feature.values());
  j["grid_shape"] = {record.grid_features.rows(), record.grid_features.cols()};
  j["grid_features"] = floats_to_json(record.grid_features.values());
  auto caps = ordered_json::array();
  for (const auto& c : record.captions) caps.push_back(c);
  j["captions"] = caps;
  j["gt_objects"] = record.gt_objects;
  if (record.embedding) j["embedding"] = floats_to_json(*record.embedding);
  return j.dump();
}

CorpusRecord record_from_json_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed corpus line: ") + e.what());
  }
  try {
    CorpusRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    auto global = json_to_floats(j.at("global_feature"), "global_feature");
    if (global.empty()) throw DataError("record " + r.image_id + " has an empty global feature");
    const std::size_t global_dim = global.size();
    r.global_feature = Tensor<float>({global_dim}, std::move(global));
    auto grid = json_to_floats(j.at("grid_features"), "grid_features");
    Shape shape;
    if (j.contains("grid_shape")) {
      shape = j.at("grid_shape").get<std::vector<std::size_t>>();
    } else {
      const std::size_t d = r.global_feature.size();
      if (d == 0 || grid.size() % d != 0) throw DataError("record " + r.image_id + " has ragged grid features");
      shape = {grid.size() / d, d};
    }
    r.grid_features = Tensor<float>(shape, std::move(grid));
    for (const auto& c : j.at("captions")) {
      auto caption = c.get<Caption>();
      if (caption.empty()) throw DataError("record " + r.image_id + " has an empty caption");
      r.captions.push_back(std::move(caption));
    }
    if (r.captions.empty()) throw DataError("record " + r.image_id + " has no captions");
    for (const auto& o : j.at("gt_objects")) r.gt_objects.insert(o.get<std::string>());
    if (j.contains("embedding")) r.embedding = json_to_floats(j.at("embedding"), "embedding");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corpus record: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("corpus record: ") + e.what());
  }
}

void save_corpus(const fs::path& path, const std::vector<CorpusRecord>& records) {
  std::string text;
  for (const auto& r : records) {
    text += record_to_json_line(r);
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

std::vector<CorpusRecord> load_corpus(const fs::path& path) {
  std::vector<CorpusRecord> records;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json_line(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (records.empty()) throw DataError("corpus " + path.string() + " is empty");
  return records;
}

}  // namespace cosnet::corpus
