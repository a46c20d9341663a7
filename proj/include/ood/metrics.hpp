#pragma once

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ood/corpus.hpp"
#include "ood/decimal.hpp"
#include "ood/split_builder.hpp"

namespace ood {

// Accuracies are percentages at full precision; nullopt marks an empty
// subset.
struct MetricsReport {
  std::optional<double> acc_all;
  std::optional<double> acc_tail;
  std::optional<double> acc_head;
  std::optional<double> delta;  // (acc_head - acc_tail) / acc_tail, in percent
  std::size_t n_all = 0;
  std::size_t n_tail = 0;
  std::size_t n_head = 0;
  std::size_t correct_all = 0;
  std::size_t correct_tail = 0;
  std::size_t correct_head = 0;
  std::size_t missing_predictions = 0;
};

// Relative gap between head and tail accuracy, in percent. Undefined when
// the tail accuracy is zero.
std::optional<double> delta_tail_head(double acc_head, double acc_tail);

// (variant - reference) / reference, in percent.
std::optional<double> relative_difference(double reference, double variant);

// Exact-match accuracy after answer normalization. Questions without a
// prediction count as wrong and are tallied in missing_predictions.
// Throws DataError for an empty benchmark.
MetricsReport evaluate(const OODBenchmark& bench, const PredictionSet& preds);

struct SweepPoint {
  Decimal alpha;
  std::size_t n_tail = 0;
  std::optional<double> acc_tail;
  std::optional<double> confusion;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
};

// 20 log-spaced values over [0.2, 5.0], rounded to 3 decimals.
std::vector<Decimal> default_alpha_grid();

// For every alpha the tail is rebuilt over the benchmark's fixed group
// selection; head/tail confusion is measured against the benchmark's own
// (default-alpha) head classes. Throws ConfigError for unsorted alphas.
SweepCurve alpha_sweep(const OODBenchmark& bench, const PredictionSet& preds,
                       std::span<const Decimal> alphas);
SweepCurve alpha_sweep(const QuestionCorpus& corpus, const BuildConfig& config,
                       const PredictionSet& preds, std::span<const Decimal> alphas);

// Fraction of questions whose gold answer is in the tail at `alpha` and whose
// predicted answer is a head class of the same group at the benchmark's alpha.
std::optional<double> head_tail_confusion(const OODBenchmark& bench, const PredictionSet& preds,
                                          const Decimal& alpha);

enum class ReasoningLabel { kReason, kBias, kOther };
const char* to_string(ReasoningLabel label);

// counts[pred][gt][outcome], indices follow Rareness (head, borderline, tail)
// and outcome 0 = correct, 1 = wrong.
using JointCounts = std::array<std::array<std::array<std::size_t, 2>, 3>, 3>;

struct LabelDistribution {
  std::size_t reason = 0;
  std::size_t bias = 0;
  std::size_t other = 0;
  std::size_t tail_questions = 0;  // binary-tail questions of this slice
  std::size_t total() const { return reason + bias + other; }
};

struct ReasoningLabelReport {
  JointCounts joint{};
  std::size_t evaluated = 0;
  std::map<std::string, ReasoningLabel> per_question;
  std::map<std::string, LabelDistribution> per_type;

  double cell_percent(Rareness pred, Rareness gt, bool correct) const;
  LabelDistribution overall() const;
};

ReasoningLabelReport reasoning_labels(const OODBenchmark& bench, const PredictionSet& preds);

struct TypeBreakdown {
  std::string type;
  std::size_t questions = 0;
  double reason = 0.0;  // fractions of the type's questions
  double bias = 0.0;
  double other = 0.0;
  bool no_tail_questions = false;
};

std::vector<TypeBreakdown> breakdown_by_type(const ReasoningLabelReport& report);
// Same, with types looked up in `corpus` instead of the benchmark.
std::vector<TypeBreakdown> breakdown_by_type(const ReasoningLabelReport& report,
                                             const OODBenchmark& bench,
                                             const QuestionCorpus& corpus);

// mean and population standard deviation over several prediction files.
struct Aggregate {
  std::optional<double> mean;
  std::optional<double> stddev;
};
struct MultiReport {
  std::vector<MetricsReport> runs;
  Aggregate acc_all, acc_tail, acc_head, delta;
};
MultiReport aggregate(std::vector<MetricsReport> runs);

void write_sweep_csv(const SweepCurve& curve, std::ostream& out);
void write_joint_csv(const ReasoningLabelReport& report, std::ostream& out);

}  // namespace ood
