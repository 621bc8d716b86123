#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cosnet::corpus {

/// Lowercases ASCII letters, deletes ASCII punctuation and splits on
/// whitespace. Bytes >= 0x80 pass through untouched.
std::vector<std::string> tokenize(std::string_view sentence);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace cosnet::corpus
