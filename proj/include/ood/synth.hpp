#pragma once

#include <cstdint>
#include <string>

#include "ood/corpus.hpp"

namespace ood {

struct IntRange {
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;
};

struct RealRange {
  double lo = 1.0;
  double hi = 1.0;
};

// Parameters of a synthetic grouped corpus. Group g draws its answer count,
// question count and skew from the ranges below; answer i of the group gets
// weight skew^i, so skew = 1 is uniform and small skew piles everything on
// the first (modal) answer.
struct SynthConfig {
  std::uint64_t n_groups = 10;
  IntRange answers_per_group{2, 6};
  RealRange skew{0.5, 0.5};  // geometric decay ratio, each bound in (0, 1]
  IntRange questions_per_group{20, 80};
  std::uint64_t seed = 0;
  std::uint64_t locals_per_global = 4;  // local groups folded into one global group
  std::string split_name = "synthetic";
};

// Throws ConfigError on empty or out-of-domain ranges.
void validate(const SynthConfig& config);

// Answer counts for one group: every answer gets one question, the rest is
// apportioned by weight skew^i with largest remainders (ties to lower i).
// If `questions < answers` only the first `questions` answers are used.
std::vector<std::uint64_t> skewed_counts(std::uint64_t answers, std::uint64_t questions,
                                         double skew);

// Deterministic in the config, including across platforms.
QuestionCorpus generate_synthetic_corpus(const SynthConfig& config);

// The structural tags drawn uniformly for synthetic records.
inline constexpr const char* kStructuralTypes[] = {"verify", "choose", "compare", "query",
                                                   "logical"};

}  // namespace ood
