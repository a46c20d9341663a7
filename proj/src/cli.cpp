#include "ood/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ood/bias_sim.hpp"
#include "ood/corpus.hpp"
#include "ood/error.hpp"
#include "ood/group_stats.hpp"
#include "ood/metrics.hpp"
#include "ood/split_builder.hpp"
#include "ood/synth.hpp"
#include "ood/text.hpp"

namespace ood::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kFormats = R"(File formats:
  corpus       JSON object, qid -> record:
                 {"q1": {"question": "What color is the rose?", "answer": "red",
                         "imageId": "img1",
                         "groups": {"local": "color-rose", "global": "color"},
                         "types": {"structural": "query", "semantic": "attr"}}}
               Unknown fields are ignored; a null local group keeps the record
               out of every group computation.
  predictions  JSON object {"q1": "red", "q2": "blue"}, or JSON lines
                 {"questionId": "q1", "prediction": "red"}
               (a JSON array of such objects is accepted too).
  benchmark    {"meta": {"alpha": 1.2, "entropy_threshold": 0.9, "base": "self", ...},
                "groups": {"color-rose": {"counts": {"red": 9, "white": 1},
                                          "entropy": 0.325, "normalized_entropy": 0.469}},
                "questions": {"q1": {"group": "color-rose", "label": "head",
                                     "answer": "red", "type": "query"}}}
  stats CSV    group_key,total,d,entropy,normalized_entropy,selected
  sweep CSV    alpha,n_tail,acc_tail,confusion
  labels CSV   predicted,ground_truth,outcome,count,percent

Exit status: 0 success, 1 configuration error, 2 data error.)";

struct Options {
  bool quiet = false;

  std::string corpus;
  std::string split;
  std::string out;
  std::string bench;
  std::vector<std::string> preds;

  double alpha = 1.2;
  double threshold = 0.9;
  std::string base = "self";
  std::string base_file;
  double rareness_low = 0.7;
  double rareness_high = 1.2;
  std::string reference_all;
  std::string reference_tail;
  std::string diff_out;

  std::string alphas;
  bool table_mode = false;
  std::string pairs;

  std::string types_out;

  std::uint64_t groups = 50;
  std::string answers = "2:6";
  std::string questions = "20:80";
  std::string skew = "0.5";
  std::uint64_t seed = 0;
  std::uint64_t locals_per_global = 4;

  double beta = 1.0;
  std::string prior = "local";
  std::string prior_base;
};

class Runner {
 public:
  Runner(const Options& opts, std::ostream& out, std::ostream& err)
      : opts_(opts), out_(out), err_(err) {}

  void warn(const std::string& message) {
    if (!opts_.quiet) err_ << "warning: " << message << '\n';
  }

  void report(const IngestReport& r) {
    for (const auto& w : r.warnings) warn(w);
  }

  // Writes through `write` to --out, or to stdout when --out is empty.
  void emit(const std::function<void(std::ostream&)>& write) {
    if (opts_.out.empty()) {
      write(out_);
      return;
    }
    std::ofstream file(opts_.out, std::ios::binary);
    if (!file) throw DataError(opts_.out + ": cannot open for writing");
    write(file);
    if (!file) throw DataError(opts_.out + ": write failed");
  }

  QuestionCorpus load_corpus(const std::string& path, const std::string& split) {
    QuestionCorpus corpus =
        parse_question_corpus(path, split.empty() ? fs::path(path).stem().string() : split);
    const IngestReport& r = corpus.ingest_report();
    report(r);
    if (!opts_.quiet) {
      err_ << path << ": loaded " << r.loaded << " records, skipped " << r.skipped << ", "
           << corpus.group_index().size() << " local groups\n";
    }
    return corpus;
  }

  PredictionSet load_preds(const std::string& path) {
    IngestReport r;
    PredictionSet p = parse_predictions(path, &r);
    report(r);
    return p;
  }

  BuildConfig build_config() const {
    BuildConfig c;
    c.alpha = Decimal::from_double(opts_.alpha);
    c.entropy_threshold = opts_.threshold;
    c.base = base_source_from_string(opts_.base);
    c.base_path = opts_.base_file;
    c.rareness.low = Decimal::from_double(opts_.rareness_low);
    c.rareness.high = Decimal::from_double(opts_.rareness_high);
    c.validate();
    return c;
  }

  void stats() {
    const QuestionCorpus corpus = load_corpus(opts_.corpus, opts_.split);
    const auto rows = group_stats(corpus, opts_.threshold);
    emit([&](std::ostream& os) { write_stats_csv(rows, os); });
  }

  void build() {
    const BuildConfig config = build_config();
    const QuestionCorpus corpus = load_corpus(opts_.corpus, opts_.split);
    OODBenchmark bench;
    switch (config.base) {
      case BaseSource::kSelfSplit:
        bench = build_ood_split(corpus, config);
        break;
      case BaseSource::kTrainSplit: {
        if (opts_.base_file.empty()) throw ConfigError("--base train requires --base-file");
        const QuestionCorpus base = load_corpus(opts_.base_file, "train");
        bench = build_ood_split(corpus, config, &base);
        break;
      }
      case BaseSource::kExternal: {
        if (opts_.base_file.empty()) throw ConfigError("--base external requires --base-file");
        const auto dists = load_distributions(opts_.base_file);
        bench = build_ood_split(corpus, config, &dists);
        break;
      }
    }
    if (bench.groups.empty()) warn("no groups selected; the benchmark is empty");
    emit([&](std::ostream& os) { export_benchmark(bench, os); });

    const BenchmarkSummary s = summarize(bench);
    err_ << "questions " << s.questions << ", groups " << s.groups << ", head " << s.head
         << ", tail " << s.tail << '\n';

    if (!opts_.reference_all.empty()) {
      const QuestionCorpus ref_all = load_corpus(opts_.reference_all, "reference-all");
      std::optional<QuestionCorpus> ref_tail;
      if (!opts_.reference_tail.empty()) {
        ref_tail = load_corpus(opts_.reference_tail, "reference-tail");
      }
      const auto diff = diff_against_reference(bench, ref_all, ref_tail ? &*ref_tail : nullptr);
      err_ << "reference: " << ref_all.size() << " questions; " << diff.size()
           << " groups differ\n";
      if (!opts_.diff_out.empty()) {
        std::ofstream file(opts_.diff_out, std::ios::binary);
        if (!file) throw DataError(opts_.diff_out + ": cannot open for writing");
        write_diff_csv(diff, file);
      } else if (!diff.empty()) {
        write_diff_csv(diff, err_);
      }
    }
  }

  void eval() {
    if (opts_.table_mode) return eval_table();
    if (opts_.bench.empty() || opts_.preds.empty()) {
      throw ConfigError("eval requires --bench and at least one --preds");
    }
    const OODBenchmark bench = import_benchmark(opts_.bench);
    std::vector<MetricsReport> runs;
    json run_list = json::array();
    for (const std::string& path : opts_.preds) {
      const PredictionSet preds = load_preds(path);
      MetricsReport r = evaluate(bench, preds);
      if (r.missing_predictions > 0) {
        warn(path + ": " + std::to_string(r.missing_predictions) +
             " benchmark questions have no prediction (counted as wrong)");
      }
      json j = report_json(r);
      j["source"] = preds.source_label;
      j["predictions"] = path;
      run_list.push_back(j);
      runs.push_back(r);
    }

    json doc;
    doc["config"] = config_json(bench);
    doc["config"]["benchmark"] = opts_.bench;
    if (runs.size() == 1) {
      doc.update(run_list[0]);
    } else {
      const MultiReport multi = aggregate(runs);
      doc["runs"] = run_list;
      auto agg = [](const Aggregate& a) {
        return json{{"mean", a.mean ? json(*a.mean) : json(nullptr)},
                    {"stddev", a.stddev ? json(*a.stddev) : json(nullptr)}};
      };
      doc["aggregate"] = {{"acc_all", agg(multi.acc_all)},
                          {"acc_tail", agg(multi.acc_tail)},
                          {"acc_head", agg(multi.acc_head)},
                          {"delta", agg(multi.delta)}};
    }
    emit([&](std::ostream& os) { os << doc.dump(2) << '\n'; });

    for (std::size_t i = 0; i < runs.size(); ++i) {
      const MetricsReport& r = runs[i];
      err_ << opts_.preds[i] << ": acc-all " << shown(r.acc_all) << ", acc-tail "
           << shown(r.acc_tail) << ", acc-head " << shown(r.acc_head) << ", delta "
           << shown(r.delta) << '\n';
    }
  }

  void sweep() {
    if (opts_.table_mode) return sweep_table();
    if (opts_.bench.empty() || opts_.preds.size() != 1) {
      throw ConfigError("sweep requires --bench and exactly one --preds");
    }
    std::vector<Decimal> alphas = opts_.alphas.empty() ? default_alpha_grid() : parse_alphas();
    const OODBenchmark bench = import_benchmark(opts_.bench);
    const PredictionSet preds = load_preds(opts_.preds.front());
    const SweepCurve curve = alpha_sweep(bench, preds, alphas);
    emit([&](std::ostream& os) { write_sweep_csv(curve, os); });
  }

  void labels() {
    if (opts_.bench.empty() || opts_.preds.size() != 1) {
      throw ConfigError("labels requires --bench and exactly one --preds");
    }
    const OODBenchmark bench = import_benchmark(opts_.bench);
    const PredictionSet preds = load_preds(opts_.preds.front());
    const ReasoningLabelReport report = reasoning_labels(bench, preds);
    emit([&](std::ostream& os) { write_joint_csv(report, os); });

    json types = json::object();
    for (const TypeBreakdown& b : breakdown_by_type(report)) {
      types[b.type] = {{"questions", b.questions},
                       {"reason", b.reason},
                       {"bias", b.bias},
                       {"other", b.other},
                       {"no_tail_questions", b.no_tail_questions}};
      if (b.no_tail_questions) warn("type '" + b.type + "' has no tail questions");
    }
    const LabelDistribution all = report.overall();
    json doc = {{"config", config_json(bench)},
                {"evaluated", report.evaluated},
                {"reason", all.reason},
                {"bias", all.bias},
                {"other", all.other},
                {"per_type", types}};
    if (opts_.types_out.empty()) {
      err_ << doc.dump(2) << '\n';
    } else {
      std::ofstream file(opts_.types_out, std::ios::binary);
      if (!file) throw DataError(opts_.types_out + ": cannot open for writing");
      file << doc.dump(2) << '\n';
    }
  }

  void synth() {
    SynthConfig c;
    c.n_groups = opts_.groups;
    c.answers_per_group = parse_int_range(opts_.answers, "--answers");
    c.questions_per_group = parse_int_range(opts_.questions, "--questions");
    c.skew = parse_real_range(opts_.skew, "--skew");
    c.seed = opts_.seed;
    c.locals_per_global = opts_.locals_per_global;
    if (!opts_.split.empty()) c.split_name = opts_.split;
    const QuestionCorpus corpus = generate_synthetic_corpus(c);
    emit([&](std::ostream& os) { write_corpus(corpus, os); });
    err_ << "generated " << corpus.size() << " questions in " << corpus.group_index().size()
         << " groups\n";
  }

  void synth_preds() {
    const QuestionCorpus corpus = load_corpus(opts_.corpus, opts_.split);
    std::optional<QuestionCorpus> base;
    if (!opts_.prior_base.empty()) base = load_corpus(opts_.prior_base, "base");
    const BiasKnob knob{opts_.beta, opts_.seed};
    const PredictionSet preds =
        knob_predictor(corpus, knob, prior_key_from_string(opts_.prior), base ? &*base : nullptr);
    emit([&](std::ostream& os) { write_predictions(preds, os); });
  }

 private:
  static std::string shown(const std::optional<double>& v) {
    return v ? format_fixed(*v, 1) : std::string("undefined");
  }

  static json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  }

  static json report_json(const MetricsReport& r) {
    return {{"acc_all", optional_json(r.acc_all)},
            {"acc_tail", optional_json(r.acc_tail)},
            {"acc_head", optional_json(r.acc_head)},
            {"delta", optional_json(r.delta)},
            {"n_all", r.n_all},
            {"n_tail", r.n_tail},
            {"n_head", r.n_head},
            {"missing_predictions", r.missing_predictions},
            {"display",
             {{"acc_all", shown(r.acc_all)},
              {"acc_tail", shown(r.acc_tail)},
              {"acc_head", shown(r.acc_head)},
              {"delta", shown(r.delta)}}}};
  }

  static json config_json(const OODBenchmark& bench) {
    return {{"alpha", bench.config.alpha.to_double()},
            {"entropy_threshold", bench.config.entropy_threshold},
            {"base", to_string(bench.config.base)},
            {"rareness_thresholds",
             {bench.config.rareness.low.to_double(), bench.config.rareness.high.to_double()}},
            {"corpus", bench.corpus_name}};
  }

  std::vector<Decimal> parse_alphas() const {
    std::vector<Decimal> alphas;
    std::stringstream ss(opts_.alphas);
    std::string item;
    while (std::getline(ss, item, ',')) alphas.push_back(Decimal::parse(item));
    if (alphas.empty()) throw ConfigError("--alphas is empty");
    return alphas;
  }

  std::vector<std::pair<double, double>> parse_pairs() const {
    if (opts_.pairs.empty()) throw ConfigError("--table-mode requires --pairs");
    std::vector<std::pair<double, double>> pairs;
    std::stringstream ss(opts_.pairs);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("--pairs entries look like A:B, got '" + item + "'");
      try {
        pairs.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ConfigError("--pairs: cannot read '" + item + "'");
      }
    }
    return pairs;
  }

  // Pairs are acc_head:acc_tail; prints the relative head/tail gap.
  void eval_table() {
    json rows = json::array();
    for (const auto& [head, tail] : parse_pairs()) {
      const auto d = delta_tail_head(head, tail);
      rows.push_back({{"acc_head", head},
                      {"acc_tail", tail},
                      {"delta", optional_json(d)},
                      {"display", shown(d)}});
    }
    emit([&](std::ostream& os) { os << rows.dump(2) << '\n'; });
  }

  // Pairs are reference:variant; prints (variant - reference) / reference.
  void sweep_table() {
    const auto pairs = parse_pairs();
    emit([&](std::ostream& os) {
      os << "reference,variant,relative_difference\n";
      for (const auto& [ref, var] : pairs) {
        const auto d = relative_difference(ref, var);
        os << format_fixed(ref, 3) << ',' << format_fixed(var, 3) << ','
           << (d ? format_fixed(*d, 6) : std::string()) << '\n';
      }
    });
  }

  static IntRange parse_int_range(const std::string& text, const char* flag) {
    try {
      const auto colon = text.find(':');
      IntRange r;
      r.lo = std::stoull(text.substr(0, colon));
      r.hi = colon == std::string::npos ? r.lo : std::stoull(text.substr(colon + 1));
      return r;
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": expected N or LO:HI, got '" + text + "'");
    }
  }

  static RealRange parse_real_range(const std::string& text, const char* flag) {
    try {
      const auto colon = text.find(':');
      RealRange r;
      r.lo = std::stod(text.substr(0, colon));
      r.hi = colon == std::string::npos ? r.lo : std::stod(text.substr(colon + 1));
      return r;
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": expected X or LO:HI, got '" + text + "'");
    }
  }

  const Options& opts_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Build out-of-distribution benchmarks from grouped question corpora and score "
               "prediction files on their head and tail."};
  app.name("oodbench");
  app.footer(kFormats);
  app.require_subcommand(1, 1);
  app.add_flag("-q,--quiet", o.quiet, "Suppress warnings");

  auto add_build_flags = [&](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "Tail factor: answers with count <= alpha * mean are tail")
        ->capture_default_str();
    sub->add_option("--entropy-threshold", o.threshold,
                    "Keep groups whose normalized entropy is below this value")
        ->capture_default_str();
  };

  CLI::App* stats = app.add_subcommand("stats", "Per-group entropy table (CSV)");
  stats->add_option("--corpus", o.corpus, "Corpus file")->required();
  stats->add_option("--split", o.split, "Split name (default: file stem)");
  stats->add_option("--entropy-threshold", o.threshold, "Selection threshold")->capture_default_str();
  stats->add_option("--out", o.out, "Output file (default: stdout)");

  CLI::App* build = app.add_subcommand("build", "Construct a benchmark file");
  build->add_option("--corpus", o.corpus, "Corpus file")->required();
  build->add_option("--split", o.split, "Split name (default: file stem)");
  add_build_flags(build);
  build->add_option("--base", o.base, "Distribution source: self, train or external")
      ->capture_default_str();
  build->add_option("--base-file", o.base_file,
                    "Training corpus (--base train) or benchmark/distribution file (--base external)");
  build->add_option("--rareness-low", o.rareness_low, "Lower bound of the borderline band")
      ->capture_default_str();
  build->add_option("--rareness-high", o.rareness_high, "Upper bound of the borderline band")
      ->capture_default_str();
  build->add_option("--reference-all", o.reference_all,
                    "Reference benchmark questions (corpus format) to diff against");
  build->add_option("--reference-tail", o.reference_tail, "Reference tail questions (corpus format)");
  build->add_option("--diff-out", o.diff_out, "Per-group diff CSV (default: diagnostics stream)");
  build->add_option("--out", o.out, "Benchmark file (default: stdout)");

  CLI::App* eval = app.add_subcommand("eval", "Score prediction files (JSON report)");
  eval->add_option("--bench", o.bench, "Benchmark file");
  eval->add_option("--preds", o.preds, "Prediction file; repeat for mean and std over runs");
  eval->add_flag("--table-mode", o.table_mode,
                 "Recompute the head/tail gap from published accuracy pairs");
  eval->add_option("--pairs", o.pairs, "Table mode input: HEAD:TAIL[,HEAD:TAIL...]");
  eval->add_option("--out", o.out, "Report file (default: stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "Tail accuracy and confusion over alpha (CSV)");
  sweep->add_option("--bench", o.bench, "Benchmark file");
  sweep->add_option("--preds", o.preds, "Prediction file");
  sweep->add_option("--alphas", o.alphas, "Comma-separated alphas (default: 20 log-spaced in [0.2, 5])");
  sweep->add_flag("--table-mode", o.table_mode,
                  "Recompute relative differences from published accuracy pairs");
  sweep->add_option("--pairs", o.pairs, "Table mode input: REFERENCE:VARIANT[,...]");
  sweep->add_option("--out", o.out, "CSV file (default: stdout)");

  CLI::App* labels = app.add_subcommand("labels", "Reasoning labels: joint matrix CSV + per-type JSON");
  labels->add_option("--bench", o.bench, "Benchmark file");
  labels->add_option("--preds", o.preds, "Prediction file");
  labels->add_option("--out", o.out, "Matrix CSV (default: stdout)");
  labels->add_option("--types-out", o.types_out, "Per-type JSON (default: diagnostics stream)");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--groups", o.groups, "Number of local groups")->capture_default_str();
  synth->add_option("--answers", o.answers, "Answers per group, N or LO:HI")->capture_default_str();
  synth->add_option("--questions", o.questions, "Questions per group, N or LO:HI")->capture_default_str();
  synth->add_option("--skew", o.skew, "Geometric decay ratio in (0, 1], X or LO:HI")->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--locals-per-global", o.locals_per_global, "Local groups per global group")
      ->capture_default_str();
  synth->add_option("--split", o.split, "Split name");
  synth->add_option("--out", o.out, "Corpus file (default: stdout)");

  CLI::App* synth_preds = app.add_subcommand("synth-preds", "Simulated biased predictions");
  synth_preds->add_option("--corpus", o.corpus, "Corpus to predict")->required();
  synth_preds->add_option("--split", o.split, "Split name (default: file stem)");
  synth_preds->add_option("--beta", o.beta, "Probability of answering the group prior")
      ->capture_default_str();
  synth_preds->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth_preds->add_option("--prior", o.prior, "Group key for the prior: local or global")
      ->capture_default_str();
  synth_preds->add_option("--base", o.prior_base, "Corpus the prior is estimated on (default: --corpus)");
  synth_preds->add_option("--out", o.out, "Prediction file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  Runner runner(o, out, err);
  try {
    if (*stats) runner.stats();
    if (*build) runner.build();
    if (*eval) runner.eval();
    if (*sweep) runner.sweep();
    if (*labels) runner.labels();
    if (*synth) runner.synth();
    if (*synth_preds) runner.synth_preds();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace ood::cli
