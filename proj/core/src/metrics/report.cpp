#include "cosnet/metrics/report.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "cosnet/metrics/bleu.hpp"
#include "cosnet/metrics/chair.hpp"
#include "cosnet/metrics/cider.hpp"
#include "cosnet/metrics/rouge.hpp"

namespace cosnet::metrics {

EvaluationReport evaluate(const std::vector<corpus::Caption>& candidates,
                          const std::vector<std::vector<corpus::Caption>>& references,
                          const std::vector<std::set<std::string>>& gt_objects, const corpus::ObjectLexicon& lexicon) {
  EvaluationReport r;
  r.images = candidates.size();
  for (std::size_t n = 1; n <= 4; ++n) r.bleu[n - 1] = corpus_bleu(candidates, references, n);
  r.rouge_l = corpus_rouge_l(candidates, references);
  r.cider = cider(candidates, references);
  const auto ch = chair(candidates, gt_objects, lexicon);
  r.chair_s = ch.chair_s;
  r.chair_i = ch.chair_i;
  return r;
}

std::string report_text(const EvaluationReport& report) {
  std::string out;
  auto line = [&](const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s %.4f\n", name, v);
    out += buf;
  };
  line("BLEU@1", report.bleu[0]);
  line("BLEU@2", report.bleu[1]);
  line("BLEU@3", report.bleu[2]);
  line("BLEU@4", report.bleu[3]);
  line("ROUGE-L", report.rouge_l);
  line("CIDEr", report.cider);
  line("CHs", report.chair_s);
  line("CHi", report.chair_i);
  return out;
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["images"] = report.images;
  j["BLEU@1"] = report.bleu[0];
  j["BLEU@2"] = report.bleu[1];
  j["BLEU@3"] = report.bleu[2];
  j["BLEU@4"] = report.bleu[3];
  j["ROUGE-L"] = report.rouge_l;
  j["CIDEr"] = report.cider;
  j["CHs"] = report.chair_s;
  j["CHi"] = report.chair_i;
  return j.dump(2) + "\n";
}

}  // namespace cosnet::metrics
