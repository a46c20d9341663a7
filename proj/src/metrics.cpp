#include "ood/metrics.hpp"

#include <cmath>

#include "ood/error.hpp"
#include "ood/text.hpp"

namespace ood {

namespace {

std::optional<double> percent(std::size_t correct, std::size_t n) {
  if (n == 0) return std::nullopt;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(n);
}

std::size_t slot_of(Rareness r) { return static_cast<std::size_t>(r); }

void check_alphas(std::span<const Decimal> alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i].mantissa() == 0) throw ConfigError("sweep alphas must be positive");
    if (i > 0 && alphas[i] < alphas[i - 1]) throw ConfigError("sweep alphas must be sorted");
  }
}

std::string fmt_optional(const std::optional<double>& v, int digits) {
  return v ? format_fixed(*v, digits) : std::string();
}

}  // namespace

std::optional<double> delta_tail_head(double acc_head, double acc_tail) {
  if (acc_tail == 0.0 || !std::isfinite(acc_tail) || !std::isfinite(acc_head)) return std::nullopt;
  return 100.0 * (acc_head - acc_tail) / acc_tail;
}

std::optional<double> relative_difference(double reference, double variant) {
  if (reference == 0.0 || !std::isfinite(reference) || !std::isfinite(variant)) return std::nullopt;
  return 100.0 * (variant - reference) / reference;
}

MetricsReport evaluate(const OODBenchmark& bench, const PredictionSet& preds) {
  if (bench.empty()) throw DataError("cannot evaluate an empty benchmark");
  MetricsReport r;
  for (const auto& [qid, q] : bench.questions) {
    const auto pred = preds.normalized(qid);
    if (!pred) ++r.missing_predictions;
    const bool correct = pred && *pred == q.answer;
    ++r.n_all;
    r.correct_all += correct;
    if (q.label == ClassLabel::kTail) {
      ++r.n_tail;
      r.correct_tail += correct;
    } else {
      ++r.n_head;
      r.correct_head += correct;
    }
  }
  r.acc_all = percent(r.correct_all, r.n_all);
  r.acc_tail = percent(r.correct_tail, r.n_tail);
  r.acc_head = percent(r.correct_head, r.n_head);
  if (r.acc_tail && r.acc_head) r.delta = delta_tail_head(*r.acc_head, *r.acc_tail);
  return r;
}

std::vector<Decimal> default_alpha_grid() {
  constexpr int kPoints = 20;
  constexpr double kLo = 0.2;
  constexpr double kHi = 5.0;
  std::vector<Decimal> grid;
  grid.reserve(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    const double x = kLo * std::pow(kHi / kLo, static_cast<double>(i) / (kPoints - 1));
    grid.push_back(Decimal::parse(format_fixed(x, 3)));
  }
  return grid;
}

std::optional<double> head_tail_confusion(const OODBenchmark& bench, const PredictionSet& preds,
                                          const Decimal& alpha) {
  std::size_t tail = 0;
  std::size_t confused = 0;
  for (const auto& [qid, q] : bench.questions) {
    const AnswerDistribution& dist = bench.groups.at(q.group).dist;
    if (!is_tail(dist.count(q.answer), dist, alpha)) continue;
    ++tail;
    const auto pred = preds.normalized(qid);
    if (!pred || *pred == q.answer) continue;
    // above the benchmark alpha the two sets overlap; a correct answer is never confused
    const std::uint64_t c = dist.count(*pred);
    if (c > 0 && !is_tail(c, dist, bench.config.alpha)) ++confused;
  }
  if (tail == 0) return std::nullopt;
  return static_cast<double>(confused) / static_cast<double>(tail);
}

SweepCurve alpha_sweep(const OODBenchmark& bench, const PredictionSet& preds,
                       std::span<const Decimal> alphas) {
  check_alphas(alphas);
  SweepCurve curve;
  for (const Decimal& alpha : alphas) {
    SweepPoint p;
    p.alpha = alpha;
    std::size_t correct = 0;
    for (const auto& [qid, q] : bench.questions) {
      const AnswerDistribution& dist = bench.groups.at(q.group).dist;
      if (!is_tail(dist.count(q.answer), dist, alpha)) continue;
      ++p.n_tail;
      const auto pred = preds.normalized(qid);
      correct += pred && *pred == q.answer;
    }
    p.acc_tail = percent(correct, p.n_tail);
    p.confusion = head_tail_confusion(bench, preds, alpha);
    curve.points.push_back(p);
  }
  return curve;
}

SweepCurve alpha_sweep(const QuestionCorpus& corpus, const BuildConfig& config,
                       const PredictionSet& preds, std::span<const Decimal> alphas) {
  return alpha_sweep(build_ood_split(corpus, config), preds, alphas);
}

const char* to_string(ReasoningLabel label) {
  switch (label) {
    case ReasoningLabel::kReason:
      return "reason";
    case ReasoningLabel::kBias:
      return "bias";
    case ReasoningLabel::kOther:
      return "other";
  }
  return "other";
}

double ReasoningLabelReport::cell_percent(Rareness pred, Rareness gt, bool correct) const {
  if (evaluated == 0) return 0.0;
  return 100.0 * static_cast<double>(joint[slot_of(pred)][slot_of(gt)][correct ? 0 : 1]) /
         static_cast<double>(evaluated);
}

LabelDistribution ReasoningLabelReport::overall() const {
  LabelDistribution all;
  for (const auto& [type, dist] : per_type) {
    all.reason += dist.reason;
    all.bias += dist.bias;
    all.other += dist.other;
    all.tail_questions += dist.tail_questions;
  }
  return all;
}

ReasoningLabelReport reasoning_labels(const OODBenchmark& bench, const PredictionSet& preds) {
  ReasoningLabelReport report;
  const RarenessThresholds& thresholds = bench.config.rareness;
  for (const auto& [qid, q] : bench.questions) {
    const AnswerDistribution& dist = bench.groups.at(q.group).dist;
    const auto pred = preds.normalized(qid);
    const Rareness gt_label = rareness_label(dist, q.answer, thresholds);
    const Rareness pred_label = pred ? rareness_label(dist, *pred, thresholds) : Rareness::kTail;
    const bool correct = pred && *pred == q.answer;

    ++report.joint[slot_of(pred_label)][slot_of(gt_label)][correct ? 0 : 1];
    ++report.evaluated;

    ReasoningLabel label = ReasoningLabel::kOther;
    if (correct && pred_label == Rareness::kTail) {
      label = ReasoningLabel::kReason;
    } else if (!correct && pred_label == Rareness::kHead && gt_label == Rareness::kTail) {
      label = ReasoningLabel::kBias;
    }
    report.per_question.emplace(qid, label);

    LabelDistribution& slot = report.per_type[q.structural_type];
    slot.reason += label == ReasoningLabel::kReason;
    slot.bias += label == ReasoningLabel::kBias;
    slot.other += label == ReasoningLabel::kOther;
    slot.tail_questions += q.label == ClassLabel::kTail;
  }
  return report;
}

namespace {

std::vector<TypeBreakdown> normalize_types(const std::map<std::string, LabelDistribution>& per_type) {
  std::vector<TypeBreakdown> out;
  for (const auto& [type, dist] : per_type) {
    TypeBreakdown b;
    b.type = type;
    b.questions = dist.total();
    if (b.questions > 0) {
      const double n = static_cast<double>(b.questions);
      b.reason = static_cast<double>(dist.reason) / n;
      b.bias = static_cast<double>(dist.bias) / n;
      b.other = static_cast<double>(dist.other) / n;
    }
    b.no_tail_questions = dist.tail_questions == 0;
    out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<TypeBreakdown> breakdown_by_type(const ReasoningLabelReport& report) {
  return normalize_types(report.per_type);
}

std::vector<TypeBreakdown> breakdown_by_type(const ReasoningLabelReport& report,
                                             const OODBenchmark& bench,
                                             const QuestionCorpus& corpus) {
  std::map<std::string, LabelDistribution> per_type;
  for (const auto& [qid, label] : report.per_question) {
    const QuestionRecord* record = corpus.find(qid);
    LabelDistribution& slot = per_type[record ? record->structural_type : std::string()];
    slot.reason += label == ReasoningLabel::kReason;
    slot.bias += label == ReasoningLabel::kBias;
    slot.other += label == ReasoningLabel::kOther;
    auto q = bench.questions.find(qid);
    slot.tail_questions += q != bench.questions.end() && q->second.label == ClassLabel::kTail;
  }
  return normalize_types(per_type);
}

MultiReport aggregate(std::vector<MetricsReport> runs) {
  MultiReport out;
  out.runs = std::move(runs);
  auto stats = [&](auto field) {
    Aggregate a;
    std::vector<double> values;
    for (const auto& r : out.runs) {
      if (const std::optional<double>& v = r.*field) values.push_back(*v);
    }
    if (values.empty()) return a;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    a.mean = mean;
    a.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return a;
  };
  out.acc_all = stats(&MetricsReport::acc_all);
  out.acc_tail = stats(&MetricsReport::acc_tail);
  out.acc_head = stats(&MetricsReport::acc_head);
  out.delta = stats(&MetricsReport::delta);
  return out;
}

void write_sweep_csv(const SweepCurve& curve, std::ostream& out) {
  out << "alpha,n_tail,acc_tail,confusion\n";
  for (const SweepPoint& p : curve.points) {
    out << p.alpha.to_string() << ',' << p.n_tail << ',' << fmt_optional(p.acc_tail, 6) << ','
        << fmt_optional(p.confusion, 6) << '\n';
  }
}

void write_joint_csv(const ReasoningLabelReport& report, std::ostream& out) {
  constexpr Rareness kOrder[] = {Rareness::kHead, Rareness::kBorderline, Rareness::kTail};
  out << "predicted,ground_truth,outcome,count,percent\n";
  for (Rareness pred : kOrder) {
    for (Rareness gt : kOrder) {
      for (bool correct : {true, false}) {
        out << to_string(pred) << ',' << to_string(gt) << ',' << (correct ? "correct" : "wrong")
            << ',' << report.joint[slot_of(pred)][slot_of(gt)][correct ? 0 : 1] << ','
            << format_fixed(report.cell_percent(pred, gt, correct), 6) << '\n';
      }
    }
  }
}

}  // namespace ood
