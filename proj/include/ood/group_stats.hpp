#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "ood/corpus.hpp"

namespace ood {

// Exact mean class size total/d.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

// Gold-answer histogram of one question group, keyed by normalized answer.
class AnswerDistribution {
 public:
  AnswerDistribution() = default;
  // Throws DataError if any count is zero.
  AnswerDistribution(std::string group_key, std::map<std::string, std::uint64_t> counts);

  const std::string& group_key() const noexcept { return group_key_; }
  const std::map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t d() const noexcept { return counts_.size(); }
  Rational mu() const noexcept { return {total_, d()}; }

  // 0 for answers never observed in the group.
  std::uint64_t count(const std::string& normalized_answer) const;
  double prob(const std::string& normalized_answer) const;
  std::map<std::string, double> probs() const;

  // Highest count; ties go to the lexicographically smallest answer.
  const std::string& modal_answer() const;

  bool operator==(const AnswerDistribution&) const = default;

 private:
  std::string group_key_;
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct EntropyScore {
  double entropy_nats = 0.0;
  std::optional<double> normalized;  // nullopt when d = 1: log(d) = 0
  std::uint64_t d = 0;
};

// Histogram of the gold answers of `group_key`'s questions.
// Throws LookupError if the corpus has no such group.
AnswerDistribution answer_distribution(const QuestionCorpus& corpus, const std::string& group_key);

// All local groups of the corpus, in key order.
std::map<std::string, AnswerDistribution> all_distributions(const QuestionCorpus& corpus);

// Natural-log Shannon entropy of a histogram. Independent of the order of
// `counts`: terms are summed in ascending count order.
double shannon_entropy(std::span<const std::uint64_t> counts);
double shannon_entropy(const AnswerDistribution& dist);

// Entropy divided by log(d). Exactly 1 for equal counts, clamped to [0, 1].
EntropyScore normalized_entropy(std::span<const std::uint64_t> counts);
EntropyScore normalized_entropy(const AnswerDistribution& dist);

// Groups with d >= 2 and normalized entropy strictly below `threshold`.
// Throws ConfigError unless 0 < threshold <= 1.
std::set<std::string> filter_imbalanced_groups(const std::map<std::string, AnswerDistribution>& dists,
                                               double threshold);
std::set<std::string> filter_imbalanced_groups(const QuestionCorpus& corpus, double threshold);

// One row of the `stats` report.
struct GroupStatsRow {
  std::string group_key;
  std::uint64_t total = 0;
  std::uint64_t d = 0;
  EntropyScore score;
  bool selected = false;
};

std::vector<GroupStatsRow> group_stats(const QuestionCorpus& corpus, double threshold);
void write_stats_csv(std::span<const GroupStatsRow> rows, std::ostream& out);

}  // namespace ood
