#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cosnet/corpus/lexicon.hpp"
#include "cosnet/corpus/record.hpp"

namespace cosnet::corpus {

enum class SplitMode { standard, robust };

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  SplitMode mode = SplitMode::standard;
};

using ObjectPair = std::pair<std::string, std::string>;  // lexicographically ordered

/// Canonical object pairs co-mentioned within single captions of a record.
std::set<ObjectPair> record_object_pairs(const CorpusRecord& record, const ObjectLexicon& lexicon);

/// Seeded random partition into train/val/test.
SplitSpec build_standard_split(const std::vector<CorpusRecord>& records, double val_fraction,
                               double test_fraction, std::uint64_t seed);

/// Holds out object pairs so that no pair mentioned in a val/test caption is
/// mentioned together in any training caption. Throws DataError when no
/// non-empty split exists.
SplitSpec build_robust_split(const std::vector<CorpusRecord>& records, const ObjectLexicon& lexicon,
                             std::uint64_t seed, double held_out_fraction = 0.2);

struct SplitCheck {
  bool ok = true;
  std::string problem;
};

/// Disjointness and coverage of the id lists; for robust splits also the
/// pair rule, checked by brute force over every caption pair.
SplitCheck verify_split(const std::vector<CorpusRecord>& records, const SplitSpec& split,
                        const ObjectLexicon& lexicon);

void save_split(const std::filesystem::path& path, const SplitSpec& split);
SplitSpec load_split(const std::filesystem::path& path);

}  // namespace cosnet::corpus
