#include "cosnet/metrics/chair.hpp"

#include "cosnet/numerics/errors.hpp"

namespace cosnet::metrics {

ChairReport chair(const std::vector<corpus::Caption>& captions, const std::vector<std::set<std::string>>& gt_objects,
                  const corpus::ObjectLexicon& lexicon) {
  if (captions.size() != gt_objects.size()) throw ContractError("CHAIR: caption/object-set count mismatch");
  ChairReport r;
  r.sentences = captions.size();
  r.hallucinated.resize(captions.size());
  for (std::size_t i = 0; i < captions.size(); ++i) {
    for (const auto& m : lexicon.find_mentions(captions[i])) {
      ++r.mentions;
      if (!gt_objects[i].contains(m.canonical)) {
        ++r.hallucinated_mentions;
        r.hallucinated[i].push_back(m.canonical);
      }
    }
    if (!r.hallucinated[i].empty()) ++r.hallucinated_sentences;
  }
  if (r.sentences > 0) r.chair_s = static_cast<double>(r.hallucinated_sentences) / static_cast<double>(r.sentences);
  if (r.mentions > 0) r.chair_i = static_cast<double>(r.hallucinated_mentions) / static_cast<double>(r.mentions);
  return r;
}

}  // namespace cosnet::metrics
