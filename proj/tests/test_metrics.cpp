#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ood/bias_sim.hpp"
#include "ood/error.hpp"
#include "ood/metrics.hpp"
#include "ood/synth.hpp"

using namespace ood;
using ood::testing::corpus_from;

namespace {

PredictionSet gold(const QuestionCorpus& corpus) {
  PredictionSet p;
  for (const auto& r : corpus.records()) p.entries[r.qid] = r.answer;
  return p;
}

QuestionCorpus skewed_corpus(std::uint64_t seed) {
  SynthConfig c;
  c.n_groups = 80;
  c.answers_per_group = {3, 5};
  c.questions_per_group = {40, 100};
  c.skew = {0.15, 0.4};
  c.seed = seed;
  return generate_synthetic_corpus(c);
}

}  // namespace

TEST_CASE("delta from published accuracy pairs") {
  CHECK(*delta_tail_head(49.1, 42.1) == doctest::Approx(16.627).epsilon(1e-4));
  CHECK(*delta_tail_head(24.1, 17.8) == doctest::Approx(35.393).epsilon(1e-4));
  CHECK_FALSE(delta_tail_head(10.0, 0.0).has_value());
  CHECK(*relative_difference(60.7, 59.8) == doctest::Approx(-1.4827).epsilon(1e-4));
  CHECK_FALSE(relative_difference(0.0, 1.0).has_value());
}

TEST_CASE("delta sign follows the head/tail ordering") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double head = 1.0 + 99.0 * rng.uniform();
    const double tail = 1.0 + 99.0 * rng.uniform();
    const double d = *delta_tail_head(head, tail);
    CHECK((head > tail) == (d > 0));
    CHECK((head == tail) == (d == 0));
  }
}

TEST_CASE("perfect predictor on a 5-head/5-tail benchmark") {
  // counts {5,2,2,1}: mean 2.5, threshold 3 -> 5 head, 5 tail
  const auto corpus = corpus_from({{"g", {{"a", 5}, {"b", 2}, {"c", 2}, {"d", 1}}}});
  const auto bench = build_ood_split(corpus, BuildConfig{});
  REQUIRE(bench.head_count() == 5);
  REQUIRE(bench.tail_count() == 5);
  const auto r = evaluate(bench, gold(corpus));
  CHECK(*r.acc_all == 100.0);
  CHECK(*r.acc_head == 100.0);
  CHECK(*r.acc_tail == 100.0);
  CHECK(*r.delta == 0.0);
  CHECK(r.missing_predictions == 0);
}

TEST_CASE("missing predictions count as wrong") {
  const auto corpus = corpus_from({{"g", {{"a", 5}, {"b", 2}, {"c", 2}, {"d", 1}}}});
  const auto bench = build_ood_split(corpus, BuildConfig{});
  auto preds = gold(corpus);
  preds.entries.erase("g-0");  // a head question
  preds.entries.erase("g-9");  // the "d" tail question
  preds.entries["g-5"] = " B ";  // normalization applies
  const auto r = evaluate(bench, preds);
  CHECK(r.missing_predictions == 2);
  CHECK(r.n_all == 10);
  CHECK(*r.acc_all == 80.0);
  CHECK(*r.acc_head == 80.0);
  CHECK(*r.acc_tail == 80.0);
}

TEST_CASE("empty subsets are undefined") {
  // counts {4,3}: both at or below 1.2 * 3.5; normalized entropy 0.985
  const auto corpus = corpus_from({{"g", {{"a", 4}, {"b", 3}}}});
  BuildConfig config;
  config.entropy_threshold = 1.0;
  const auto bench = build_ood_split(corpus, config);
  const auto r = evaluate(bench, gold(corpus));
  CHECK(r.n_head == 0);
  CHECK_FALSE(r.acc_head.has_value());
  CHECK_FALSE(r.delta.has_value());
  CHECK(*r.acc_tail == 100.0);
  CHECK_THROWS_AS(evaluate(OODBenchmark{}, gold(corpus)), DataError);
}

TEST_CASE("property: weighted-mean identity") {
  Rng rng(8);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto corpus = skewed_corpus(seed);
    const auto bench = build_ood_split(corpus, BuildConfig{});
    const auto preds = knob_predictor(corpus, BiasKnob{rng.uniform(), seed});
    const auto r = evaluate(bench, preds);
    CHECK(r.n_all == r.n_head + r.n_tail);
    const double lhs = *r.acc_all * static_cast<double>(r.n_all);
    const double rhs = *r.acc_head * static_cast<double>(r.n_head) +
                       *r.acc_tail * static_cast<double>(r.n_tail);
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("property: metrics are invariant under qid and group renaming") {
  const auto corpus = skewed_corpus(4);
  const auto preds = knob_predictor(corpus, BiasKnob{0.4, 1});
  std::vector<QuestionRecord> renamed;
  PredictionSet renamed_preds;
  for (const auto& r : corpus.records()) {
    QuestionRecord copy = r;
    copy.qid = "x" + std::to_string(fnv1a64(r.qid));
    copy.local_group = "renamed/" + *r.local_group;
    renamed_preds.entries[copy.qid] = preds.entries.at(r.qid);
    renamed.push_back(copy);
  }
  const QuestionCorpus other("renamed", renamed);
  const auto a = evaluate(build_ood_split(corpus, BuildConfig{}), preds);
  const auto b = evaluate(build_ood_split(other, BuildConfig{}), renamed_preds);
  CHECK(a.acc_all == b.acc_all);
  CHECK(a.acc_tail == b.acc_tail);
  CHECK(a.acc_head == b.acc_head);
  CHECK(a.n_tail == b.n_tail);
}

TEST_CASE("default alpha grid") {
  const auto grid = default_alpha_grid();
  REQUIRE(grid.size() == 20);
  CHECK(grid.front() == Decimal::parse("0.2"));
  CHECK(grid.back() == Decimal::parse("5"));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i - 1] < grid[i]);
    // log spacing: constant ratio 25^(1/19) up to the 3-decimal rounding
    const double ratio = grid[i].to_double() / grid[i - 1].to_double();
    CHECK(ratio == doctest::Approx(std::pow(25.0, 1.0 / 19.0)).epsilon(0.01));
  }
}

TEST_CASE("sweep: perfect predictor is flat and confusion-free") {
  const auto corpus = skewed_corpus(1);
  const auto bench = build_ood_split(corpus, BuildConfig{});
  const auto grid = default_alpha_grid();
  const auto curve = alpha_sweep(bench, gold(corpus), grid);
  std::size_t previous = 0;
  for (const auto& p : curve.points) {
    CHECK(p.n_tail >= previous);
    previous = p.n_tail;
    if (p.n_tail > 0) {
      CHECK(*p.acc_tail == 100.0);
      CHECK(*p.confusion == 0.0);
    } else {
      CHECK_FALSE(p.acc_tail.has_value());
      CHECK_FALSE(p.confusion.has_value());
    }
  }
}

TEST_CASE("sweep: the largest alpha reproduces acc-all") {
  // d <= 5 means count <= 5 * mean, so alpha = 5 covers every question
  const auto corpus = skewed_corpus(2);
  const auto bench = build_ood_split(corpus, BuildConfig{});
  const auto preds = knob_predictor(corpus, BiasKnob{0.6, 9});
  const auto grid = default_alpha_grid();
  const auto curve = alpha_sweep(bench, preds, grid);
  const auto r = evaluate(bench, preds);
  CHECK(curve.points.back().n_tail == r.n_all);
  CHECK(*curve.points.back().acc_tail == *r.acc_all);
}

TEST_CASE("sweep: a rarity-dependent predictor degrades as alpha shrinks") {
  // Answers the gold label when its count is at least half the group mean,
  // otherwise the modal answer. Brute-force acc-tail per alpha decides the
  // expected shape.
  const auto corpus = skewed_corpus(6);
  const auto bench = build_ood_split(corpus, BuildConfig{});
  PredictionSet preds;
  for (const auto& [qid, q] : bench.questions) {
    const auto& dist = bench.groups.at(q.group).dist;
    const bool common = 2 * dist.count(q.answer) * dist.d() >= dist.total();
    preds.entries[qid] = common ? q.answer : dist.modal_answer();
  }
  const auto grid = default_alpha_grid();
  const auto curve = alpha_sweep(bench, preds, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::size_t n = 0;
    std::size_t correct = 0;
    for (const auto& [qid, q] : bench.questions) {
      const auto& dist = bench.groups.at(q.group).dist;
      if (grid[i].compare_ratio(dist.count(q.answer), dist.d(), dist.total()) > 0) continue;
      ++n;
      correct += preds.entries.at(qid) == q.answer;
    }
    CHECK(curve.points[i].n_tail == n);
    if (n > 0) CHECK(*curve.points[i].acc_tail == doctest::Approx(100.0 * correct / n));
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (!curve.points[i - 1].acc_tail) continue;
    CHECK(*curve.points[i - 1].acc_tail <= *curve.points[i].acc_tail);
  }
  CHECK_THROWS_AS(alpha_sweep(bench, preds, std::vector<Decimal>{Decimal::parse("2"),
                                                                  Decimal::parse("1")}),
                  ConfigError);
}

TEST_CASE("confusion of the prior predictor when every modal class is head") {
  const auto corpus = skewed_corpus(3);
  const auto bench = build_ood_split(corpus, BuildConfig{});
  // Every selected group's modal answer must be head for this oracle.
  for (const auto& [key, g] : bench.groups) {
    REQUIRE_FALSE(is_tail(g.dist.count(g.dist.modal_answer()), g.dist, bench.config.alpha));
  }
  const auto prior = question_prior_predictor(corpus, corpus);
  CHECK(*head_tail_confusion(bench, prior, Decimal::parse("1.2")) == 1.0);
  CHECK(*head_tail_confusion(bench, prior, Decimal::parse("0.5")) == 1.0);
  CHECK(*head_tail_confusion(bench, gold(corpus), Decimal::parse("0.3")) == 0.0);
  CHECK_FALSE(head_tail_confusion(bench, prior, Decimal::parse("0.00001")).has_value());
}

TEST_CASE("confusion counts predictions against the fixed head set") {
  // counts {6,3,1}: mean 10/3, threshold 4 at 1.2 -> head {a}; tail {b, c}
  const auto corpus = corpus_from({{"g", {{"a", 6}, {"b", 3}, {"c", 1}}}});
  const auto bench = build_ood_split(corpus, BuildConfig{});
  PredictionSet preds = gold(corpus);
  preds.entries["g-6"] = "a";  // b -> head answer
  preds.entries["g-9"] = "b";  // c -> tail answer, not confusion
  CHECK(*head_tail_confusion(bench, preds, Decimal::parse("1.2")) == doctest::Approx(0.25));
  // alpha 0.5: threshold 5/3, only c is tail
  CHECK(*head_tail_confusion(bench, preds, Decimal::parse("0.5")) == 0.0);
}

TEST_CASE("reasoning labels and the joint matrix") {
  // counts {10,5,3}: a head, b borderline, c tail
  const auto corpus = corpus_from({{"g", {{"a", 10}, {"b", 5}, {"c", 3}}}});
  const auto bench = build_ood_split(corpus, BuildConfig{});
  PredictionSet preds = gold(corpus);
  preds.entries["g-15"] = "a";      // tail GT, head prediction, wrong -> bias
  preds.entries.erase("g-16");      // missing: wrong, predicted label tail
  const auto report = reasoning_labels(bench, preds);
  CHECK(report.evaluated == 18);
  CHECK(report.per_question.at("g-15") == ReasoningLabel::kBias);
  CHECK(report.per_question.at("g-16") == ReasoningLabel::kOther);
  CHECK(report.per_question.at("g-17") == ReasoningLabel::kReason);
  CHECK(report.per_question.at("g-0") == ReasoningLabel::kOther);
  CHECK(report.joint[2][2][0] == 1);  // tail/tail/correct
  CHECK(report.joint[0][2][1] == 1);  // head/tail/wrong
  CHECK(report.joint[2][2][1] == 1);  // missing
  CHECK(report.joint[0][0][0] == 10);
  CHECK(report.joint[1][1][0] == 5);
  const auto all = report.overall();
  CHECK(all.reason == 1);
  CHECK(all.bias == 1);
  CHECK(all.other == 16);
  double sum = 0;
  for (auto p : {Rareness::kHead, Rareness::kBorderline, Rareness::kTail}) {
    for (auto g : {Rareness::kHead, Rareness::kBorderline, Rareness::kTail}) {
      sum += report.cell_percent(p, g, true) + report.cell_percent(p, g, false);
    }
  }
  CHECK(sum == doctest::Approx(100.0));

  std::ostringstream os;
  write_joint_csv(report, os);
  CHECK(os.str().find("tail,tail,correct,1,5.555556\n") != std::string::npos);
}

TEST_CASE("breakdown by type") {
  // "query" questions are answered by the prior, "verify" ones by gold.
  const auto query = corpus_from({{"g", {{"a", 12}, {"b", 2}, {"c", 1}}}}, "query");
  const auto verify = corpus_from({{"h", {{"x", 12}, {"y", 2}, {"z", 1}}}}, "verify");
  std::vector<QuestionRecord> records(query.records().begin(), query.records().end());
  records.insert(records.end(), verify.records().begin(), verify.records().end());
  const QuestionCorpus corpus("mixed", records);
  const auto bench = build_ood_split(corpus, BuildConfig{});
  const auto prior = question_prior_predictor(corpus, corpus);
  PredictionSet preds;
  for (const auto& r : corpus.records()) {
    preds.entries[r.qid] = r.structural_type == "query" ? prior.entries.at(r.qid) : r.answer;
  }
  const auto report = reasoning_labels(bench, preds);
  const auto types = breakdown_by_type(report);
  REQUIRE(types.size() == 2);
  // brute force: query -> 3 tail questions all biased; verify -> 3 reasons
  CHECK(types[0].type == "query");
  CHECK(types[0].bias == doctest::Approx(3.0 / 15.0));
  CHECK(types[0].reason == 0.0);
  CHECK(types[1].type == "verify");
  CHECK(types[1].bias == 0.0);
  CHECK(types[1].reason == doctest::Approx(3.0 / 15.0));
  CHECK(breakdown_by_type(report, bench, corpus).size() == 2);

  // single type: breakdown equals the global distribution
  const auto single = corpus_from({{"g", {{"a", 12}, {"b", 2}, {"c", 1}}}});
  const auto sb = build_ood_split(single, BuildConfig{});
  const auto sr = reasoning_labels(sb, question_prior_predictor(single, single));
  const auto st = breakdown_by_type(sr);
  REQUIRE(st.size() == 1);
  const auto all = sr.overall();
  CHECK(st[0].bias == doctest::Approx(static_cast<double>(all.bias) / all.total()));
  CHECK(st[0].reason == doctest::Approx(static_cast<double>(all.reason) / all.total()));
}

TEST_CASE("types without tail questions are flagged") {
  ReasoningLabelReport report;
  report.per_type["compare"] = LabelDistribution{0, 0, 4, 0};
  report.per_type["query"] = LabelDistribution{1, 1, 2, 2};
  const auto types = breakdown_by_type(report);
  CHECK(types[0].no_tail_questions);
  CHECK_FALSE(types[1].no_tail_questions);
}

TEST_CASE("aggregate over several runs uses the population deviation") {
  MetricsReport a;
  a.acc_all = 40.0;
  a.acc_tail = 30.0;
  MetricsReport b;
  b.acc_all = 44.0;
  b.acc_tail = std::nullopt;
  const auto m = aggregate({a, b});
  CHECK(*m.acc_all.mean == 42.0);
  CHECK(*m.acc_all.stddev == 2.0);
  CHECK(*m.acc_tail.mean == 30.0);
  CHECK(*m.acc_tail.stddev == 0.0);
  CHECK_FALSE(m.acc_head.mean.has_value());
}
