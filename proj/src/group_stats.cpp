#include "ood/group_stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "ood/error.hpp"
#include "ood/text.hpp"

namespace ood {

AnswerDistribution::AnswerDistribution(std::string group_key,
                                       std::map<std::string, std::uint64_t> counts)
    : group_key_(std::move(group_key)), counts_(std::move(counts)) {
  for (const auto& [answer, c] : counts_) {
    if (c == 0) {
      throw DataError("group '" + group_key_ + "': answer '" + answer + "' has a zero count");
    }
    total_ += c;
  }
}

std::uint64_t AnswerDistribution::count(const std::string& normalized_answer) const {
  auto it = counts_.find(normalized_answer);
  return it == counts_.end() ? 0 : it->second;
}

double AnswerDistribution::prob(const std::string& normalized_answer) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(normalized_answer)) / static_cast<double>(total_);
}

std::map<std::string, double> AnswerDistribution::probs() const {
  std::map<std::string, double> out;
  for (const auto& [answer, c] : counts_) {
    out.emplace(answer, static_cast<double>(c) / static_cast<double>(total_));
  }
  return out;
}

const std::string& AnswerDistribution::modal_answer() const {
  if (counts_.empty()) throw LookupError("group '" + group_key_ + "' is empty");
  auto best = counts_.begin();
  for (auto it = counts_.begin(); it != counts_.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

AnswerDistribution answer_distribution(const QuestionCorpus& corpus, const std::string& group_key) {
  auto it = corpus.group_index().find(group_key);
  if (it == corpus.group_index().end() || it->second.empty()) {
    throw LookupError("corpus '" + corpus.split_name() + "': unknown group '" + group_key + "'");
  }
  std::map<std::string, std::uint64_t> counts;
  const auto records = corpus.records();
  for (std::size_t i : it->second) ++counts[normalize_answer(records[i].answer)];
  return AnswerDistribution(group_key, std::move(counts));
}

std::map<std::string, AnswerDistribution> all_distributions(const QuestionCorpus& corpus) {
  std::map<std::string, AnswerDistribution> out;
  for (const auto& [key, members] : corpus.group_index()) {
    out.emplace_hint(out.end(), key, answer_distribution(corpus, key));
  }
  return out;
}

double shannon_entropy(std::span<const std::uint64_t> counts) {
  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t total = 0;
  for (auto c : sorted) total += c;
  if (total == 0) return 0.0;
  // H = log N - (1/N) sum c log c
  double sum = 0.0;
  for (auto c : sorted) {
    if (c > 0) sum += static_cast<double>(c) * std::log(static_cast<double>(c));
  }
  const double n = static_cast<double>(total);
  return std::max(0.0, std::log(n) - sum / n);
}

double shannon_entropy(const AnswerDistribution& dist) {
  std::vector<std::uint64_t> counts;
  counts.reserve(dist.d());
  for (const auto& [answer, c] : dist.counts()) counts.push_back(c);
  return shannon_entropy(counts);
}

EntropyScore normalized_entropy(std::span<const std::uint64_t> counts) {
  EntropyScore score;
  score.d = static_cast<std::uint64_t>(
      std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }));
  if (score.d <= 1) {
    score.entropy_nats = 0.0;
    return score;
  }
  const double log_d = std::log(static_cast<double>(score.d));
  std::uint64_t first = 0;
  bool uniform = true;
  for (auto c : counts) {
    if (c == 0) continue;
    if (first == 0) first = c;
    uniform = uniform && c == first;
  }
  if (uniform) {
    score.entropy_nats = log_d;
    score.normalized = 1.0;
    return score;
  }
  score.entropy_nats = shannon_entropy(counts);
  // A non-uniform histogram has entropy strictly below log d; keep rounding
  // from producing exactly 1.
  score.normalized = std::clamp(score.entropy_nats / log_d, 0.0, std::nextafter(1.0, 0.0));
  return score;
}

EntropyScore normalized_entropy(const AnswerDistribution& dist) {
  std::vector<std::uint64_t> counts;
  counts.reserve(dist.d());
  for (const auto& [answer, c] : dist.counts()) counts.push_back(c);
  return normalized_entropy(counts);
}

std::set<std::string> filter_imbalanced_groups(const std::map<std::string, AnswerDistribution>& dists,
                                               double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("entropy threshold must satisfy 0 < T <= 1, got " + std::to_string(threshold));
  }
  std::set<std::string> kept;
  for (const auto& [key, dist] : dists) {
    const EntropyScore s = normalized_entropy(dist);
    if (s.normalized && *s.normalized < threshold) kept.insert(kept.end(), key);
  }
  return kept;
}

std::set<std::string> filter_imbalanced_groups(const QuestionCorpus& corpus, double threshold) {
  return filter_imbalanced_groups(all_distributions(corpus), threshold);
}

std::vector<GroupStatsRow> group_stats(const QuestionCorpus& corpus, double threshold) {
  const auto dists = all_distributions(corpus);
  const auto kept = filter_imbalanced_groups(dists, threshold);
  std::vector<GroupStatsRow> rows;
  rows.reserve(dists.size());
  for (const auto& [key, dist] : dists) {
    rows.push_back({key, dist.total(), dist.d(), normalized_entropy(dist), kept.contains(key)});
  }
  return rows;
}

void write_stats_csv(std::span<const GroupStatsRow> rows, std::ostream& out) {
  out << "group_key,total,d,entropy,normalized_entropy,selected\n";
  for (const auto& row : rows) {
    out << csv_field(row.group_key) << ',' << row.total << ',' << row.d << ','
        << format_fixed(row.score.entropy_nats, 9) << ',';
    if (row.score.normalized) out << format_fixed(*row.score.normalized, 9);
    out << ',' << (row.selected ? "true" : "false") << '\n';
  }
}

}  // namespace ood
