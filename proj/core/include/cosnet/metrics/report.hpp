#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cosnet/corpus/lexicon.hpp"

namespace cosnet::metrics {

struct EvaluationReport {
  std::array<double, 4> bleu{};  // BLEU@1..4, corpus level
  double rouge_l = 0.0;
  double cider = 0.0;
  double chair_s = 0.0;
  double chair_i = 0.0;
  std::size_t images = 0;
};

EvaluationReport evaluate(const std::vector<corpus::Caption>& candidates,
                          const std::vector<std::vector<corpus::Caption>>& references,
                          const std::vector<std::set<std::string>>& gt_objects, const corpus::ObjectLexicon& lexicon);

/// "name value" lines, values to four decimals.
std::string report_text(const EvaluationReport& report);
std::string report_json(const EvaluationReport& report);

}  // namespace cosnet::metrics
