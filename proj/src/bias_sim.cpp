#include "ood/bias_sim.hpp"

#include <cmath>

#include "ood/error.hpp"
#include "ood/random.hpp"
#include "ood/text.hpp"

namespace ood {

namespace {

const std::optional<std::string>& group_of(const QuestionRecord& r, PriorKey key) {
  return key == PriorKey::kLocal ? r.local_group : r.global_group;
}

// Highest count wins; std::map order makes the smallest answer win ties.
std::string modal(const std::map<std::string, std::uint64_t>& counts) {
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best == counts.end() ? std::string() : best->first;
}

}  // namespace

PriorKey prior_key_from_string(const std::string& text) {
  if (text == "local") return PriorKey::kLocal;
  if (text == "global") return PriorKey::kGlobal;
  throw ConfigError("unknown prior '" + text + "' (expected local or global)");
}

const std::string& AnswerPrior::predict(const QuestionRecord& question, PriorKey key) const {
  if (const auto& group = group_of(question, key)) {
    auto it = by_group.find(*group);
    if (it != by_group.end()) return it->second;
  }
  return fallback;
}

AnswerPrior estimate_prior(const QuestionCorpus& base, PriorKey key) {
  std::map<std::string, std::map<std::string, std::uint64_t>> per_group;
  std::map<std::string, std::uint64_t> overall;
  for (const QuestionRecord& r : base.records()) {
    const std::string answer = normalize_answer(r.answer);
    ++overall[answer];
    if (const auto& group = group_of(r, key)) ++per_group[*group][answer];
  }
  AnswerPrior prior;
  for (const auto& [group, counts] : per_group) prior.by_group.emplace(group, modal(counts));
  prior.fallback = modal(overall);
  return prior;
}

PredictionSet question_prior_predictor(const QuestionCorpus& base, const QuestionCorpus& target,
                                       PriorKey key) {
  const AnswerPrior prior = estimate_prior(base, key);
  PredictionSet preds;
  preds.source_label = "question-prior";
  for (const QuestionRecord& r : target.records()) {
    preds.entries.emplace_hint(preds.entries.end(), r.qid, prior.predict(r, key));
  }
  return preds;
}

PredictionSet knob_predictor(const QuestionCorpus& corpus, const BiasKnob& knob, PriorKey key,
                             const QuestionCorpus* base) {
  if (!(knob.beta >= 0.0 && knob.beta <= 1.0)) {
    throw ConfigError("bias knob beta must lie in [0, 1]");
  }
  const AnswerPrior prior = estimate_prior(base ? *base : corpus, key);
  PredictionSet preds;
  preds.source_label = "knob-beta-" + format_fixed(knob.beta, 2);
  for (const QuestionRecord& r : corpus.records()) {
    const bool biased = keyed_uniform(knob.seed, r.qid) < knob.beta;
    preds.entries.emplace_hint(preds.entries.end(), r.qid,
                               biased ? prior.predict(r, key) : normalize_answer(r.answer));
  }
  return preds;
}

}  // namespace ood
