#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ood/corpus.hpp"
#include "ood/decimal.hpp"
#include "ood/group_stats.hpp"

namespace ood {

// Where the per-group answer histograms used for selection and labeling come
// from: the evaluated split itself, a training corpus, or a distribution file.
enum class BaseSource { kSelfSplit, kTrainSplit, kExternal };

std::string to_string(BaseSource source);
BaseSource base_source_from_string(const std::string& text);

struct RarenessThresholds {
  Decimal low = Decimal::parse("0.7");
  Decimal high = Decimal::parse("1.2");
  bool operator==(const RarenessThresholds&) const = default;
};

struct BuildConfig {
  Decimal alpha = Decimal::parse("1.2");
  double entropy_threshold = 0.9;
  BaseSource base = BaseSource::kSelfSplit;
  std::string base_path;  // informational; recorded in exports
  RarenessThresholds rareness;

  // Throws ConfigError unless alpha > 0, 0 < T <= 1 and low < high.
  void validate() const;
  bool operator==(const BuildConfig&) const = default;
};

enum class ClassLabel { kHead, kTail };
enum class Rareness { kHead, kBorderline, kTail };

const char* to_string(ClassLabel label);
const char* to_string(Rareness label);

// Tail iff count <= alpha * mean, evaluated exactly as count * d <= alpha * total.
bool is_tail(std::uint64_t count, const AnswerDistribution& dist, const Decimal& alpha);
std::map<std::string, ClassLabel> classify_answers(const AnswerDistribution& dist,
                                                   const Decimal& alpha);

// With r = count / mean: head if r > high, tail if r < low, borderline
// otherwise (both bounds included). Unseen answers have r = 0.
Rareness rareness_label(const AnswerDistribution& dist, const std::string& normalized_answer,
                        const RarenessThresholds& thresholds);

struct BenchGroup {
  AnswerDistribution dist;
  double entropy = 0.0;
  double normalized_entropy = 0.0;
  bool operator==(const BenchGroup&) const = default;
};

struct BenchQuestion {
  std::string group;
  ClassLabel label = ClassLabel::kTail;
  std::string answer;           // normalized gold answer
  std::string structural_type;  // may be empty
  bool operator==(const BenchQuestion&) const = default;
};

struct OODBenchmark {
  BuildConfig config;
  std::string corpus_name;
  std::map<std::string, BenchGroup> groups;
  std::map<std::string, BenchQuestion> questions;

  std::vector<std::string> head_qids() const;
  std::vector<std::string> tail_qids() const;
  std::size_t head_count() const;
  std::size_t tail_count() const;
  bool empty() const noexcept { return questions.empty(); }

  bool operator==(const OODBenchmark&) const = default;
};

// Distributions from `base` when the config asks for a base; otherwise from
// the corpus itself. `base` is ignored for kSelfSplit. Throws ConfigError
// when a base is required but missing, or shares no group with the corpus.
OODBenchmark build_ood_split(const QuestionCorpus& corpus, const BuildConfig& config,
                             const std::map<std::string, AnswerDistribution>* base = nullptr);
OODBenchmark build_ood_split(const QuestionCorpus& corpus, const BuildConfig& config,
                             const QuestionCorpus* base);

// Same benchmark with a different tail factor; group selection and
// distributions are kept.
OODBenchmark relabel(const OODBenchmark& bench, const Decimal& alpha);

void export_benchmark(const OODBenchmark& bench, std::ostream& out);
void export_benchmark(const OODBenchmark& bench, const std::filesystem::path& path);
OODBenchmark import_benchmark(const std::filesystem::path& path);
OODBenchmark import_benchmark(std::istream& in, const std::string& name);

// Reads the `groups` section of a benchmark file as base distributions.
std::map<std::string, AnswerDistribution> load_distributions(const std::filesystem::path& path);

struct BenchmarkSummary {
  std::size_t questions = 0;
  std::size_t groups = 0;
  std::size_t head = 0;
  std::size_t tail = 0;
};
BenchmarkSummary summarize(const OODBenchmark& bench);

// Per-group comparison against a reference benchmark given as question
// corpora (all questions, and optionally the tail subset).
struct GroupDiff {
  std::string group;
  std::size_t ours = 0;
  std::size_t reference = 0;
  std::size_t ours_tail = 0;
  std::size_t reference_tail = 0;
};
std::vector<GroupDiff> diff_against_reference(const OODBenchmark& bench,
                                              const QuestionCorpus& reference_all,
                                              const QuestionCorpus* reference_tail);
void write_diff_csv(std::span<const GroupDiff> rows, std::ostream& out);

}  // namespace ood
