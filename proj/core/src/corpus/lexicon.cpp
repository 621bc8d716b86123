#include "cosnet/corpus/lexicon.hpp"

#include <algorithm>
#include <set>

#include "cosnet/corpus/io.hpp"
#include "cosnet/corpus/tokenize.hpp"
#include "cosnet/numerics/errors.hpp"

namespace cosnet::corpus {

void ObjectLexicon::add(const std::string& surface_form, const std::string& canonical) {
  const auto tokens = tokenize(surface_form);
  if (tokens.empty() || canonical.empty()) throw DataError("empty lexicon entry");
  const std::string key = join_tokens(tokens);
  auto [it, inserted] = forms_.emplace(key, canonical);
  if (!inserted && it->second != canonical) {
    throw DataError("surface form '" + key + "' maps to both " + it->second + " and " + canonical);
  }
  max_form_tokens_ = std::max(max_form_tokens_, tokens.size());
}

std::vector<std::string> ObjectLexicon::canonical_objects() const {
  std::set<std::string> out;
  for (const auto& [form, canonical] : forms_) out.insert(canonical);
  return {out.begin(), out.end()};
}

std::vector<ObjectMention> ObjectLexicon::find_mentions(const Caption& tokens) const {
  std::vector<ObjectMention> mentions;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool matched = false;
    const std::size_t longest = std::min(max_form_tokens_, tokens.size() - i);
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key = tokens[i];
      for (std::size_t j = 1; j < len; ++j) key += " " + tokens[i + j];
      auto it = forms_.find(key);
      if (it != forms_.end()) {
        mentions.push_back({i, len, it->second});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return mentions;
}

void ObjectLexicon::save(const std::filesystem::path& path) const {
  std::string text;
  for (const auto& [form, canonical] : forms_) text += form + "\t" + canonical + "\n";
  write_file_atomic(path, text);
}

ObjectLexicon ObjectLexicon::load(const std::filesystem::path& path) {
  ObjectLexicon lexicon;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected surface_form<TAB>canonical");
    }
    lexicon.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return lexicon;
}

}  // namespace cosnet::corpus
