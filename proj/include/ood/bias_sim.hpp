#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ood/corpus.hpp"

namespace ood {

// Which group key a prior is estimated over.
enum class PriorKey { kLocal, kGlobal };

PriorKey prior_key_from_string(const std::string& text);

// Modal gold answer per group of `base` (ties: lexicographically smallest
// normalized answer), plus the corpus-wide modal answer as fallback.
struct AnswerPrior {
  std::map<std::string, std::string> by_group;
  std::string fallback;

  const std::string& predict(const QuestionRecord& question, PriorKey key) const;
};

AnswerPrior estimate_prior(const QuestionCorpus& base, PriorKey key);

// Blind baseline: every target question gets its group's modal base answer.
PredictionSet question_prior_predictor(const QuestionCorpus& base, const QuestionCorpus& target,
                                       PriorKey key = PriorKey::kLocal);

struct BiasKnob {
  double beta = 0.0;  // probability of answering with the group prior
  std::uint64_t seed = 0;
};

// With probability beta answer the modal answer of the question's group,
// otherwise the gold answer. The draw for a question depends only on
// (seed, qid). `base` defaults to `corpus` for prior estimation.
PredictionSet knob_predictor(const QuestionCorpus& corpus, const BiasKnob& knob,
                             PriorKey key = PriorKey::kLocal,
                             const QuestionCorpus* base = nullptr);

}  // namespace ood
