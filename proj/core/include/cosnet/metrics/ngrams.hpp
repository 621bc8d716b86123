#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cosnet/corpus/record.hpp"

namespace cosnet::metrics {

using corpus::Caption;
using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, std::size_t>;

/// Multiset of the n-grams of one order.
NGramCounts count_ngrams(const Caption& tokens, std::size_t n);

/// Neumaier-compensated sum; keeps corpus means independent of input order
/// to well below 1e-9.
double stable_sum(std::span<const double> values);
double stable_mean(std::span<const double> values);

}  // namespace cosnet::metrics
