#include "cosnet/corpus/word_vocab.hpp"

#include <algorithm>
#include <map>

#include "cosnet/corpus/io.hpp"
#include "cosnet/numerics/errors.hpp"

namespace cosnet::corpus {

namespace {
const std::vector<std::string> kSpecials = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

WordVocabulary::WordVocabulary() : WordVocabulary(std::vector<std::string>{}) {}

WordVocabulary::WordVocabulary(std::vector<std::string> words) {
  tokens_ = kSpecials;
  tokens_.insert(tokens_.end(), words.begin(), words.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw DataError("duplicate word in vocabulary: " + tokens_[i]);
    }
  }
}

std::size_t WordVocabulary::index_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> WordVocabulary::encode(const Caption& caption) const {
  std::vector<std::size_t> ids;
  ids.reserve(caption.size());
  for (const auto& w : caption) ids.push_back(index_of(w));
  return ids;
}

Caption WordVocabulary::decode(std::span<const std::size_t> ids) const {
  Caption out;
  for (std::size_t id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(token(id));
  }
  return out;
}

void WordVocabulary::save(const std::filesystem::path& path) const {
  std::string text;
  for (const auto& t : tokens_) text += t + "\n";
  write_file_atomic(path, text);
}

WordVocabulary WordVocabulary::load(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  if (lines.size() < kSpecialCount || !std::equal(kSpecials.begin(), kSpecials.end(), lines.begin())) {
    throw DataError("word vocabulary " + path.string() + " does not start with the reserved specials");
  }
  return WordVocabulary(std::vector<std::string>(lines.begin() + kSpecialCount, lines.end()));
}

WordVocabulary build_word_vocab(std::span<const CorpusRecord> records, std::size_t min_count) {
  if (records.empty()) throw ContractError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    for (const auto& c : r.captions) {
      for (const auto& w : c) ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [w, n] : counts) {
    if (n >= min_count && std::find(kSpecials.begin(), kSpecials.end(), w) == kSpecials.end()) {
      kept.emplace_back(w, n);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, n] : kept) words.push_back(std::move(w));
  return WordVocabulary(std::move(words));
}

}  // namespace cosnet::corpus
