#include "cosnet/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "cosnet/corpus/io.hpp"
#include "cosnet/numerics/errors.hpp"
#include "cosnet/numerics/random.hpp"

namespace cosnet::corpus {

namespace {

std::set<ObjectPair> caption_pairs(const Caption& caption, const ObjectLexicon& lexicon) {
  std::set<std::string> objects;
  for (const auto& m : lexicon.find_mentions(caption)) objects.insert(m.canonical);
  std::set<ObjectPair> pairs;
  for (auto a = objects.begin(); a != objects.end(); ++a) {
    for (auto b = std::next(a); b != objects.end(); ++b) pairs.emplace(*a, *b);
  }
  return pairs;
}

std::vector<std::string> ids_of(const std::vector<CorpusRecord>& records, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(records[i].image_id);
  return out;
}

}  // namespace

std::set<ObjectPair> record_object_pairs(const CorpusRecord& record, const ObjectLexicon& lexicon) {
  std::set<ObjectPair> out;
  for (const auto& c : record.captions) out.merge(caption_pairs(c, lexicon));
  return out;
}

SplitSpec build_standard_split(const std::vector<CorpusRecord>& records, double val_fraction,
                               double test_fraction, std::uint64_t seed) {
  if (records.empty()) throw ContractError("cannot split an empty corpus");
  if (val_fraction < 0 || test_fraction < 0 || val_fraction + test_fraction >= 1.0) {
    throw ContractError("split fractions must be nonnegative and leave room for training");
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n = static_cast<double>(records.size());
  const auto n_val = static_cast<std::size_t>(std::floor(n * val_fraction));
  const auto n_test = static_cast<std::size_t>(std::floor(n * test_fraction));
  SplitSpec split;
  split.mode = SplitMode::standard;
  split.val = ids_of(records, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val)});
  split.test = ids_of(records, {order.begin() + static_cast<std::ptrdiff_t>(n_val),
                                order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test)});
  split.train = ids_of(records, {order.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), order.end()});
  return split;
}

SplitSpec build_robust_split(const std::vector<CorpusRecord>& records, const ObjectLexicon& lexicon,
                             std::uint64_t seed, double held_out_fraction) {
  if (records.empty()) throw ContractError("cannot split an empty corpus");
  if (!(held_out_fraction > 0.0 && held_out_fraction < 1.0)) {
    throw ContractError("held-out fraction must lie in (0, 1)");
  }
  const std::size_t n = records.size();
  std::vector<std::set<ObjectPair>> pairs_of(n);
  std::map<ObjectPair, std::vector<std::size_t>> images_with;
  for (std::size_t i = 0; i < n; ++i) {
    pairs_of[i] = record_object_pairs(records[i], lexicon);
    for (const auto& p : pairs_of[i]) images_with[p].push_back(i);
  }
  std::vector<ObjectPair> candidates;
  for (const auto& [p, imgs] : images_with) candidates.push_back(p);
  Rng rng(seed);
  rng.shuffle(candidates);

  // Holding out a pair evicts every image that mentions it; those images'
  // other pairs must then be held out too. Grow each group to closure.
  const auto target = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(held_out_fraction * n)));
  std::set<ObjectPair> held_pairs;
  std::vector<bool> held(n, false);
  std::size_t held_count = 0;
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& seed_pair : candidates) {
    if (held_count >= target) break;
    if (held_pairs.contains(seed_pair)) continue;
    std::set<ObjectPair> group_pairs{seed_pair};
    std::set<std::size_t> group_images;
    std::vector<ObjectPair> frontier{seed_pair};
    while (!frontier.empty()) {
      const ObjectPair p = frontier.back();
      frontier.pop_back();
      for (std::size_t img : images_with[p]) {
        if (held[img] || !group_images.insert(img).second) continue;
        for (const auto& q : pairs_of[img]) {
          if (!held_pairs.contains(q) && group_pairs.insert(q).second) frontier.push_back(q);
        }
      }
    }
    if (group_images.empty() || held_count + group_images.size() > target + target / 2 ||
        held_count + group_images.size() >= n) {
      continue;
    }
    held_pairs.insert(group_pairs.begin(), group_pairs.end());
    for (auto img : group_images) held[img] = true;
    held_count += group_images.size();
    groups.emplace_back(group_images.begin(), group_images.end());
  }
  if (groups.size() < 2 && held_count < 2) {
    throw DataError("no feasible robust split: every held-out object pair would empty the training set");
  }

  SplitSpec split;
  split.mode = SplitMode::robust;
  std::vector<std::size_t> val_idx, test_idx, train_idx;
  for (const auto& g : groups) {
    auto& dst = test_idx.size() <= val_idx.size() ? test_idx : val_idx;
    dst.insert(dst.end(), g.begin(), g.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!held[i]) train_idx.push_back(i);
  }
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  split.train = ids_of(records, train_idx);
  split.val = ids_of(records, val_idx);
  split.test = ids_of(records, test_idx);
  if (split.train.empty() || split.test.empty()) {
    throw DataError("no feasible robust split: train or test would be empty");
  }
  const auto check = verify_split(records, split, lexicon);
  if (!check.ok) throw DataError("robust split failed verification: " + check.problem);
  return split;
}

SplitCheck verify_split(const std::vector<CorpusRecord>& records, const SplitSpec& split,
                        const ObjectLexicon& lexicon) {
  std::unordered_map<std::string, const CorpusRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.image_id, &r);
  std::unordered_set<std::string> seen;
  for (const auto* list : {&split.train, &split.val, &split.test}) {
    for (const auto& id : *list) {
      if (!by_id.contains(id)) return {false, "unknown image id " + id};
      if (!seen.insert(id).second) return {false, "image " + id + " appears twice"};
    }
  }
  if (seen.size() != by_id.size()) return {false, "split does not cover the corpus"};
  if (split.mode != SplitMode::robust) return {};

  // Brute force: every training caption against every held-out caption.
  std::vector<std::set<std::string>> train_objects;
  for (const auto& id : split.train) {
    for (const auto& c : by_id.at(id)->captions) {
      std::set<std::string> objs;
      for (const auto& m : lexicon.find_mentions(c)) objs.insert(m.canonical);
      train_objects.push_back(std::move(objs));
    }
  }
  for (const auto* list : {&split.val, &split.test}) {
    for (const auto& id : *list) {
      for (const auto& c : by_id.at(id)->captions) {
        std::vector<std::string> objs;
        for (const auto& m : lexicon.find_mentions(c)) objs.push_back(m.canonical);
        for (std::size_t a = 0; a < objs.size(); ++a) {
          for (std::size_t b = 0; b < objs.size(); ++b) {
            if (objs[a] == objs[b]) continue;
            for (const auto& t : train_objects) {
              if (t.contains(objs[a]) && t.contains(objs[b])) {
                return {false, "pair (" + objs[a] + ", " + objs[b] + ") of " + id + " also occurs in training"};
              }
            }
          }
        }
      }
    }
  }
  return {};
}

void save_split(const std::filesystem::path& path, const SplitSpec& split) {
  std::string text = split.mode == SplitMode::robust ? "# mode robust\n" : "# mode standard\n";
  auto section = [&](const char* name, const std::vector<std::string>& ids) {
    text += std::string("[") + name + "]\n";
    for (const auto& id : ids) text += id + "\n";
  };
  section("train", split.train);
  section("val", split.val);
  section("test", split.test);
  write_file_atomic(path, text);
}

SplitSpec load_split(const std::filesystem::path& path) {
  SplitSpec split;
  std::vector<std::string>* current = nullptr;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    if (line == "# mode robust") {
      split.mode = SplitMode::robust;
    } else if (line[0] == '#') {
      continue;
    } else if (line == "[train]") {
      current = &split.train;
    } else if (line == "[val]") {
      current = &split.val;
    } else if (line == "[test]") {
      current = &split.test;
    } else if (current == nullptr) {
      throw DataError(path.string() + ": image id before any [train]/[val]/[test] header");
    } else {
      current->push_back(line);
    }
  }
  return split;
}

}  // namespace cosnet::corpus
