#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::corpus {

struct ObjectMention {
  std::size_t position = 0;  // first token
  std::size_t length = 1;    // tokens covered
  std::string canonical;
};

/// Surface form (one or more tokens) -> canonical object.
class ObjectLexicon {
 public:
  void add(const std::string& surface_form, const std::string& canonical);
  std::size_t size() const noexcept { return forms_.size(); }
  const std::map<std::string, std::string>& forms() const noexcept { return forms_; }
  std::vector<std::string> canonical_objects() const;

  /// Left-to-right scan taking the longest matching form at each position.
  std::vector<ObjectMention> find_mentions(const Caption& tokens) const;

  // "surface_form<TAB>canonical_object" per line.
  void save(const std::filesystem::path& path) const;
  static ObjectLexicon load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> forms_;
  std::size_t max_form_tokens_ = 1;
};

}  // namespace cosnet::corpus
