#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::corpus {

/// Whole-file read; DataError naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// One JSON object per line with fields image_id, global_feature,
/// grid_features (row-major, with grid_shape), captions, gt_objects and an
/// optional embedding.
std::string record_to_json_line(const CorpusRecord& record);
CorpusRecord record_from_json_line(const std::string& line);

void save_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

}  // namespace cosnet::corpus
