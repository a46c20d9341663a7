#include "ood/split_builder.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "ood/error.hpp"
#include "ood/text.hpp"

namespace ood {

using nlohmann::json;

namespace {

constexpr const char* kCreatedBy = "oodbench 0.1.0";

}  // namespace

std::string to_string(BaseSource source) {
  switch (source) {
    case BaseSource::kSelfSplit:
      return "self";
    case BaseSource::kTrainSplit:
      return "train";
    case BaseSource::kExternal:
      return "external";
  }
  return "self";
}

BaseSource base_source_from_string(const std::string& text) {
  if (text == "self") return BaseSource::kSelfSplit;
  if (text == "train") return BaseSource::kTrainSplit;
  if (text == "external") return BaseSource::kExternal;
  throw ConfigError("unknown base distribution '" + text + "' (expected self, train or external)");
}

void BuildConfig::validate() const {
  if (alpha.mantissa() == 0) throw ConfigError("alpha must be positive");
  if (!(entropy_threshold > 0.0 && entropy_threshold <= 1.0)) {
    throw ConfigError("entropy threshold must satisfy 0 < T <= 1");
  }
  if (!(rareness.low < rareness.high)) {
    throw ConfigError("rareness thresholds must satisfy low < high");
  }
}

const char* to_string(ClassLabel label) { return label == ClassLabel::kHead ? "head" : "tail"; }

const char* to_string(Rareness label) {
  switch (label) {
    case Rareness::kHead:
      return "head";
    case Rareness::kBorderline:
      return "borderline";
    case Rareness::kTail:
      return "tail";
  }
  return "tail";
}

bool is_tail(std::uint64_t count, const AnswerDistribution& dist, const Decimal& alpha) {
  return alpha.compare_ratio(count, dist.d(), dist.total()) <= 0;
}

std::map<std::string, ClassLabel> classify_answers(const AnswerDistribution& dist,
                                                   const Decimal& alpha) {
  std::map<std::string, ClassLabel> out;
  for (const auto& [answer, c] : dist.counts()) {
    out.emplace_hint(out.end(), answer, is_tail(c, dist, alpha) ? ClassLabel::kTail : ClassLabel::kHead);
  }
  return out;
}

Rareness rareness_label(const AnswerDistribution& dist, const std::string& normalized_answer,
                        const RarenessThresholds& thresholds) {
  const std::uint64_t c = dist.count(normalized_answer);
  if (thresholds.high.compare_ratio(c, dist.d(), dist.total()) > 0) return Rareness::kHead;
  if (thresholds.low.compare_ratio(c, dist.d(), dist.total()) < 0) return Rareness::kTail;
  return Rareness::kBorderline;
}

std::vector<std::string> OODBenchmark::head_qids() const {
  std::vector<std::string> out;
  for (const auto& [qid, q] : questions) {
    if (q.label == ClassLabel::kHead) out.push_back(qid);
  }
  return out;
}

std::vector<std::string> OODBenchmark::tail_qids() const {
  std::vector<std::string> out;
  for (const auto& [qid, q] : questions) {
    if (q.label == ClassLabel::kTail) out.push_back(qid);
  }
  return out;
}

std::size_t OODBenchmark::head_count() const { return questions.size() - tail_count(); }

std::size_t OODBenchmark::tail_count() const {
  std::size_t n = 0;
  for (const auto& [qid, q] : questions) n += q.label == ClassLabel::kTail;
  return n;
}

OODBenchmark build_ood_split(const QuestionCorpus& corpus, const BuildConfig& config,
                             const std::map<std::string, AnswerDistribution>* base) {
  config.validate();
  std::map<std::string, AnswerDistribution> own;
  const std::map<std::string, AnswerDistribution>* source = nullptr;
  if (config.base == BaseSource::kSelfSplit) {
    own = all_distributions(corpus);
    source = &own;
  } else {
    if (base == nullptr) {
      throw ConfigError("base distribution '" + to_string(config.base) +
                        "' requested but no base was provided");
    }
    const bool shares_group = std::any_of(base->begin(), base->end(), [&](const auto& entry) {
      return corpus.has_group(entry.first);
    });
    if (!shares_group) {
      throw ConfigError("base distribution shares no group key with corpus '" +
                        corpus.split_name() + "'");
    }
    source = base;
  }

  OODBenchmark bench;
  bench.config = config;
  bench.corpus_name = corpus.split_name();
  const auto records = corpus.records();
  for (const std::string& key : filter_imbalanced_groups(*source, config.entropy_threshold)) {
    auto members = corpus.group_index().find(key);
    if (members == corpus.group_index().end()) continue;
    const AnswerDistribution& dist = source->at(key);
    const EntropyScore score = normalized_entropy(dist);
    bench.groups.emplace(key, BenchGroup{dist, score.entropy_nats, score.normalized.value_or(0.0)});
    for (std::size_t i : members->second) {
      const QuestionRecord& r = records[i];
      BenchQuestion q;
      q.group = key;
      q.answer = normalize_answer(r.answer);
      q.label = is_tail(dist.count(q.answer), dist, config.alpha) ? ClassLabel::kTail
                                                                   : ClassLabel::kHead;
      q.structural_type = r.structural_type;
      bench.questions.emplace(r.qid, std::move(q));
    }
  }
  return bench;
}

OODBenchmark build_ood_split(const QuestionCorpus& corpus, const BuildConfig& config,
                             const QuestionCorpus* base) {
  if (config.base == BaseSource::kSelfSplit || base == nullptr) {
    return build_ood_split(corpus, config, static_cast<const std::map<std::string, AnswerDistribution>*>(nullptr));
  }
  const auto dists = all_distributions(*base);
  return build_ood_split(corpus, config, &dists);
}

OODBenchmark relabel(const OODBenchmark& bench, const Decimal& alpha) {
  OODBenchmark out = bench;
  out.config.alpha = alpha;
  out.config.validate();
  for (auto& [qid, q] : out.questions) {
    const AnswerDistribution& dist = out.groups.at(q.group).dist;
    q.label = is_tail(dist.count(q.answer), dist, alpha) ? ClassLabel::kTail : ClassLabel::kHead;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark file

void export_benchmark(const OODBenchmark& bench, std::ostream& out) {
  json meta = {
      {"alpha", bench.config.alpha.to_double()},
      {"entropy_threshold", bench.config.entropy_threshold},
      {"base", to_string(bench.config.base)},
      {"base_path", bench.config.base_path},
      {"rareness_thresholds",
       {bench.config.rareness.low.to_double(), bench.config.rareness.high.to_double()}},
      {"corpus", bench.corpus_name},
      {"created", kCreatedBy},
      {"n_questions", bench.questions.size()},
      {"n_groups", bench.groups.size()},
      {"n_head", bench.head_count()},
      {"n_tail", bench.tail_count()},
  };

  // Written piecewise so large benchmarks are not held twice in memory.
  out << "{\n\"meta\":" << meta.dump() << ",\n\"groups\":{";
  bool first = true;
  for (const auto& [key, g] : bench.groups) {
    json counts(json::value_t::object);
    for (const auto& [answer, c] : g.dist.counts()) counts[answer] = c;
    json entry = {{"counts", counts},
                  {"entropy", g.entropy},
                  {"normalized_entropy", g.normalized_entropy}};
    out << (first ? "\n" : ",\n") << json(key).dump() << ':' << entry.dump();
    first = false;
  }
  out << (first ? "},\n" : "\n},\n") << "\"questions\":{";
  first = true;
  for (const auto& [qid, q] : bench.questions) {
    json entry = {{"group", q.group},
                  {"label", to_string(q.label)},
                  {"answer", q.answer},
                  {"type", q.structural_type}};
    out << (first ? "\n" : ",\n") << json(qid).dump() << ':' << entry.dump();
    first = false;
  }
  out << (first ? "}\n}\n" : "\n}\n}\n");
}

void export_benchmark(const OODBenchmark& bench, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  export_benchmark(bench, out);
  if (!out) throw DataError(path.string() + ": write failed");
}

namespace {

json parse_json_file(std::istream& in, const std::string& name) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(name, e.byte > 0 ? e.byte - 1 : 0, e.what());
  }
}

std::map<std::string, AnswerDistribution> distributions_from(const json& groups,
                                                             const std::string& name) {
  if (!groups.is_object()) throw DataError(name + ": 'groups' must be an object");
  std::map<std::string, AnswerDistribution> out;
  for (const auto& [key, entry] : groups.items()) {
    if (!entry.is_object() || !entry.contains("counts") || !entry["counts"].is_object()) {
      throw DataError(name + ": group '" + key + "' has no 'counts' object");
    }
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [answer, c] : entry["counts"].items()) {
      if (!c.is_number_unsigned() || c.get<std::uint64_t>() == 0) {
        throw DataError(name + ": group '" + key + "', answer '" + answer +
                        "' needs a positive integer count");
      }
      counts[normalize_answer(answer)] += c.get<std::uint64_t>();
    }
    out.emplace(key, AnswerDistribution(key, std::move(counts)));
  }
  return out;
}

}  // namespace

OODBenchmark import_benchmark(std::istream& in, const std::string& name) {
  const json doc = parse_json_file(in, name);
  if (!doc.is_object() || !doc.contains("meta") || !doc.contains("groups") ||
      !doc.contains("questions")) {
    throw DataError(name + ": expected an object with 'meta', 'groups' and 'questions'");
  }
  OODBenchmark bench;
  try {
    const json& meta = doc["meta"];
    bench.config.alpha = Decimal::from_double(meta.at("alpha").get<double>());
    bench.config.entropy_threshold = meta.at("entropy_threshold").get<double>();
    bench.config.base = base_source_from_string(meta.value("base", std::string("self")));
    bench.config.base_path = meta.value("base_path", std::string());
    if (meta.contains("rareness_thresholds")) {
      const json& t = meta["rareness_thresholds"];
      bench.config.rareness.low = Decimal::from_double(t.at(0).get<double>());
      bench.config.rareness.high = Decimal::from_double(t.at(1).get<double>());
    }
    bench.corpus_name = meta.value("corpus", std::string());
  } catch (const json::exception& e) {
    throw DataError(name + ": invalid 'meta': " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(name + ": invalid 'meta': " + e.what());
  }

  for (auto& [key, dist] : distributions_from(doc["groups"], name)) {
    const json& entry = doc["groups"][key];
    BenchGroup g;
    g.dist = std::move(dist);
    const EntropyScore score = normalized_entropy(g.dist);
    g.entropy = entry.value("entropy", score.entropy_nats);
    g.normalized_entropy = entry.value("normalized_entropy", score.normalized.value_or(0.0));
    bench.groups.emplace(key, std::move(g));
  }

  for (const auto& [qid, entry] : doc["questions"].items()) {
    try {
      BenchQuestion q;
      q.group = entry.at("group").get<std::string>();
      const std::string label = entry.at("label").get<std::string>();
      if (label != "head" && label != "tail") {
        throw DataError(name + ": question '" + qid + "' has label '" + label + "'");
      }
      q.label = label == "head" ? ClassLabel::kHead : ClassLabel::kTail;
      q.answer = normalize_answer(entry.value("answer", std::string()));
      q.structural_type = entry.value("type", std::string());
      if (!bench.groups.contains(q.group)) {
        throw DataError(name + ": question '" + qid + "' refers to unknown group '" + q.group + "'");
      }
      bench.questions.emplace(qid, std::move(q));
    } catch (const json::exception& e) {
      throw DataError(name + ": question '" + qid + "': " + e.what());
    }
  }
  return bench;
}

OODBenchmark import_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return import_benchmark(in, path.string());
}

std::map<std::string, AnswerDistribution> load_distributions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  const json doc = parse_json_file(in, path.string());
  if (!doc.is_object() || !doc.contains("groups")) {
    throw DataError(path.string() + ": expected an object with a 'groups' section");
  }
  return distributions_from(doc["groups"], path.string());
}

BenchmarkSummary summarize(const OODBenchmark& bench) {
  BenchmarkSummary s;
  s.questions = bench.questions.size();
  s.groups = bench.groups.size();
  s.tail = bench.tail_count();
  s.head = s.questions - s.tail;
  return s;
}

std::vector<GroupDiff> diff_against_reference(const OODBenchmark& bench,
                                              const QuestionCorpus& reference_all,
                                              const QuestionCorpus* reference_tail) {
  std::map<std::string, GroupDiff> rows;
  auto row = [&](const std::string& key) -> GroupDiff& {
    auto [it, inserted] = rows.try_emplace(key);
    if (inserted) it->second.group = key;
    return it->second;
  };
  for (const auto& [qid, q] : bench.questions) {
    GroupDiff& r = row(q.group);
    ++r.ours;
    if (q.label == ClassLabel::kTail) ++r.ours_tail;
  }
  for (const auto& [key, members] : reference_all.group_index()) row(key).reference += members.size();
  if (reference_tail) {
    for (const auto& [key, members] : reference_tail->group_index()) {
      row(key).reference_tail += members.size();
    }
  }
  std::vector<GroupDiff> out;
  for (auto& [key, r] : rows) {
    const bool tail_differs = reference_tail && r.ours_tail != r.reference_tail;
    if (r.ours != r.reference || tail_differs) out.push_back(std::move(r));
  }
  return out;
}

void write_diff_csv(std::span<const GroupDiff> rows, std::ostream& out) {
  out << "group,ours,reference,ours_tail,reference_tail\n";
  for (const auto& r : rows) {
    out << csv_field(r.group) << ',' << r.ours << ',' << r.reference << ',' << r.ours_tail << ','
        << r.reference_tail << '\n';
  }
}

}  // namespace ood
