#include "ood/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "ood/error.hpp"
#include "ood/text.hpp"

namespace ood {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxStoredWarnings = 200;

void note(IngestReport& report, std::string message) {
  if (report.warnings.size() < kMaxStoredWarnings) {
    report.warn(std::move(message));
  } else if (report.warnings.size() == kMaxStoredWarnings) {
    report.warn("further warnings suppressed");
  }
}

// Offset of the first byte that is not whitespace or a UTF-8 BOM, and that
// byte (or -1 at end of input).
std::pair<std::size_t, int> first_significant_byte(std::istream& in) {
  std::size_t offset = 0;
  int c = in.get();
  if (c == 0xEF) {
    if (in.get() == 0xBB && in.get() == 0xBF) {
      offset = 3;
      c = in.get();
    } else {
      return {0, 0xEF};
    }
  }
  while (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
    ++offset;
    c = in.get();
  }
  return {offset, c == std::char_traits<char>::eof() ? -1 : c};
}

// SAX consumer for the corpus format. Only the fields we understand are
// materialized; everything else is skipped without building a DOM, so
// memory is bounded by one record at a time plus the output.
class CorpusSax {
 public:
  CorpusSax(const std::string& path, IngestReport& report,
            std::vector<QuestionRecord>& out)
      : path_(path), report_(report), out_(out) {}

  bool null() { return scalar(std::nullopt, false); }
  bool boolean(bool) { return scalar(std::nullopt, true); }
  bool number_integer(json::number_integer_t) { return scalar(std::nullopt, true); }
  bool number_unsigned(json::number_unsigned_t) { return scalar(std::nullopt, true); }
  bool number_float(json::number_float_t, const std::string&) {
    return scalar(std::nullopt, true);
  }
  bool string(std::string& s) { return scalar(std::move(s), true); }
  bool binary(json::binary_t&) { return scalar(std::nullopt, true); }

  bool start_object(std::size_t) {
    if (skip_ > 0) {
      ++skip_;
      return true;
    }
    switch (depth_) {
      case 0:
        break;
      case 1:
        current_ = QuestionRecord{};
        current_.qid = key_;
        answer_state_ = AnswerState::kMissing;
        record_malformed_.clear();
        break;
      case 2:
        if (key_ == "groups") {
          section_ = Section::kGroups;
        } else if (key_ == "types") {
          section_ = Section::kTypes;
        } else {
          skip_ = 1;
          return true;
        }
        break;
      default:
        skip_ = 1;
        return true;
    }
    ++depth_;
    return true;
  }

  bool end_object() {
    if (skip_ > 0) {
      --skip_;
      return true;
    }
    --depth_;
    if (depth_ == 1) finish_record();
    if (depth_ == 2) section_ = Section::kNone;
    return true;
  }

  bool start_array(std::size_t) {
    if (skip_ > 0) {
      ++skip_;
      return true;
    }
    if (depth_ == 1) {
      reject(key_, "record is not an object");
    } else if (depth_ == 2 && key_ == "answer") {
      answer_state_ = AnswerState::kMultiple;
    }
    skip_ = 1;
    return true;
  }

  bool end_array() {
    --skip_;
    return true;
  }

  bool key(std::string& k) {
    if (skip_ == 0) key_ = std::move(k);
    return true;
  }

  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) {
    error_offset_ = position;
    error_message_ = ex.what();
    return false;
  }

  std::size_t error_offset() const { return error_offset_; }
  const std::string& error_message() const { return error_message_; }

 private:
  enum class Section { kNone, kGroups, kTypes };
  enum class AnswerState { kMissing, kPresent, kMultiple, kInvalid };

  bool scalar(std::optional<std::string> value, bool non_null) {
    if (skip_ > 0) return true;
    if (depth_ == 1) {
      reject(key_, "record is not an object");
      return true;
    }
    if (depth_ == 2) {
      if (key_ == "answer") {
        if (value) {
          current_.answer = std::move(*value);
          answer_state_ = AnswerState::kPresent;
        } else {
          answer_state_ = AnswerState::kInvalid;
        }
      } else if (key_ == "question" && value) {
        current_.text = std::move(*value);
      } else if (key_ == "imageId" && value) {
        current_.image_id = std::move(*value);
      } else if ((key_ == "question" || key_ == "imageId") && non_null) {
        record_malformed_ = "field '" + key_ + "' is not a string";
      }
      return true;
    }
    if (depth_ == 3) {
      auto group = [&](std::optional<std::string>& slot) {
        if (value && !value->empty()) {
          slot = std::move(*value);
        } else {
          slot.reset();
        }
      };
      if (section_ == Section::kGroups) {
        if (key_ == "local") group(current_.local_group);
        if (key_ == "global") group(current_.global_group);
      } else if (section_ == Section::kTypes && value) {
        if (key_ == "structural") current_.structural_type = std::move(*value);
        if (key_ == "semantic") current_.semantic_type = std::move(*value);
      }
    }
    return true;
  }

  void reject(const std::string& qid, const std::string& why) {
    ++report_.skipped;
    note(report_, path_ + ": record '" + qid + "' skipped: " + why);
  }

  void finish_record() {
    const std::string qid = current_.qid;
    if (qid.empty()) return reject(qid, "empty question id");
    if (!record_malformed_.empty()) return reject(qid, record_malformed_);
    switch (answer_state_) {
      case AnswerState::kMissing:
        return reject(qid, "missing 'answer'");
      case AnswerState::kMultiple:
        ++report_.multi_answer;
        return reject(qid, "multiple answers; a single gold answer is required");
      case AnswerState::kInvalid:
        return reject(qid, "'answer' is not a string");
      case AnswerState::kPresent:
        break;
    }
    if (normalize_answer(current_.answer).empty()) return reject(qid, "empty answer");
    if (!seen_.insert(qid).second) {
      ++report_.duplicates;
      return reject(qid, "duplicate question id");
    }
    ++report_.loaded;
    if (!current_.local_group) ++report_.groupless;
    out_.push_back(std::move(current_));
  }

  const std::string& path_;
  IngestReport& report_;
  std::vector<QuestionRecord>& out_;
  std::unordered_set<std::string> seen_;

  int depth_ = 0;
  int skip_ = 0;
  Section section_ = Section::kNone;
  std::string key_;
  QuestionRecord current_;
  AnswerState answer_state_ = AnswerState::kMissing;
  std::string record_malformed_;

  std::size_t error_offset_ = 0;
  std::string error_message_;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return in;
}

json record_to_json(const QuestionRecord& r) {
  json j;
  j["question"] = r.text;
  j["answer"] = r.answer;
  j["imageId"] = r.image_id;
  j["groups"] = {
      {"local", r.local_group ? json(*r.local_group) : json(nullptr)},
      {"global", r.global_group ? json(*r.global_group) : json(nullptr)},
  };
  j["types"] = {{"structural", r.structural_type}, {"semantic", r.semantic_type}};
  return j;
}

}  // namespace

QuestionCorpus::QuestionCorpus(std::string split_name, std::vector<QuestionRecord> records)
    : split_name_(std::move(split_name)), records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const QuestionRecord& a, const QuestionRecord& b) { return a.qid < b.qid; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const QuestionRecord& r = records_[i];
    if (r.qid.empty()) throw DataError("corpus '" + split_name_ + "': empty question id");
    if (normalize_answer(r.answer).empty()) {
      throw DataError("corpus '" + split_name_ + "': question '" + r.qid + "' has an empty answer");
    }
    if (i > 0 && records_[i - 1].qid == r.qid) {
      throw DataError("corpus '" + split_name_ + "': duplicate question id '" + r.qid + "'");
    }
    if (r.local_group) {
      group_index_[*r.local_group].push_back(i);
    } else {
      ++groupless_;
    }
  }
}

std::vector<std::string> QuestionCorpus::group_qids(const std::string& key) const {
  auto it = group_index_.find(key);
  if (it == group_index_.end()) {
    throw LookupError("corpus '" + split_name_ + "': unknown group '" + key + "'");
  }
  std::vector<std::string> qids;
  qids.reserve(it->second.size());
  for (std::size_t i : it->second) qids.push_back(records_[i].qid);
  return qids;
}

const QuestionRecord* QuestionCorpus::find(std::string_view qid) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), qid,
      [](const QuestionRecord& r, std::string_view q) { return r.qid < q; });
  if (it == records_.end() || it->qid != qid) return nullptr;
  return &*it;
}

std::size_t QuestionCorpus::image_count() const {
  std::set<std::string_view> images;
  for (const auto& r : records_) images.insert(r.image_id);
  return images.size();
}

QuestionCorpus parse_question_corpus(const std::filesystem::path& path,
                                     const std::string& split_name) {
  std::ifstream in = open_input(path);
  const auto [offset, first] = first_significant_byte(in);
  if (first == -1) throw ParseError(path.string(), offset, "empty file");
  if (first != '{') {
    throw ParseError(path.string(), offset, "top-level value must be a JSON object");
  }
  in.clear();
  in.seekg(0);

  IngestReport report;
  std::vector<QuestionRecord> records;
  const std::string path_text = path.string();
  CorpusSax sax(path_text, report, records);
  if (!json::sax_parse(in, &sax)) {
    throw ParseError(path_text, sax.error_offset(), sax.error_message());
  }

  QuestionCorpus corpus(split_name, std::move(records));
  if (corpus.size() > 0 && corpus.group_index().empty()) {
    note(report, path_text + ": no record carries a local group");
  } else if (report.groupless > 0) {
    note(report, path_text + ": " + std::to_string(report.groupless) +
                     " records without a local group (kept, excluded from grouping)");
  }
  corpus.set_ingest_report(std::move(report));
  return corpus;
}

void write_corpus(const QuestionCorpus& corpus, std::ostream& out) {
  out << '{';
  bool first = true;
  for (const QuestionRecord& r : corpus.records()) {
    if (!first) out << ',';
    first = false;
    out << '\n' << json(r.qid).dump() << ':' << record_to_json(r).dump();
  }
  out << (first ? "}\n" : "\n}\n");
}

void write_corpus(const QuestionCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_corpus(corpus, out);
  if (!out) throw DataError(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Predictions

std::optional<std::string> PredictionSet::normalized(const std::string& qid) const {
  auto it = entries.find(qid);
  if (it == entries.end()) return std::nullopt;
  return normalize_answer(it->second);
}

namespace {

void add_prediction(PredictionSet& preds, IngestReport& report, const std::string& path,
                    std::string qid, std::string answer) {
  auto [it, inserted] = preds.entries.insert_or_assign(std::move(qid), std::move(answer));
  if (!inserted) {
    ++report.duplicates;
    note(report, path + ": duplicate prediction for '" + it->first + "', keeping the last one");
  } else {
    ++report.loaded;
  }
}

std::optional<std::string> id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  return std::nullopt;
}

void add_prediction_object(PredictionSet& preds, IngestReport& report,
                           const std::string& where, const std::string& path,
                           const json& obj) {
  if (!obj.is_object() || !obj.contains("questionId") || !obj.contains("prediction")) {
    ++report.skipped;
    note(report, where + ": expected an object with 'questionId' and 'prediction'");
    return;
  }
  auto qid = id_string(obj["questionId"]);
  if (!qid || !obj["prediction"].is_string()) {
    ++report.skipped;
    note(report, where + ": 'questionId' or 'prediction' has the wrong type");
    return;
  }
  add_prediction(preds, report, path, std::move(*qid), obj["prediction"].get<std::string>());
}

}  // namespace

PredictionSet parse_predictions(const std::filesystem::path& path, IngestReport* report_out) {
  std::ifstream in = open_input(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError(path.string() + ": read failed");

  const std::string path_text = path.string();
  IngestReport report;
  PredictionSet preds;
  preds.source_label = path.stem().string();

  std::size_t start = 0;
  if (content.rfind("\xEF\xBB\xBF", 0) == 0) start = 3;
  start = content.find_first_not_of(" \t\r\n", start);

  auto parse_value = [&](std::string_view text, std::size_t base) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path_text, base + (e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
  };

  if (start == std::string::npos) {
    note(report, path_text + ": empty prediction file");
  } else if (content[start] == '[') {
    const json doc = parse_value(content, 0);
    std::size_t i = 0;
    for (const json& item : doc) {
      add_prediction_object(preds, report, path_text + ": element " + std::to_string(i++),
                            path_text, item);
    }
  } else if (content[start] == '{') {
    const std::size_t line_end = content.find('\n', start);
    const std::string_view first_line =
        std::string_view(content).substr(start, line_end == std::string::npos
                                                    ? std::string::npos
                                                    : line_end - start);
    const json probe = json::parse(first_line, nullptr, false);
    const bool jsonl = !probe.is_discarded() && probe.is_object() &&
                       probe.contains("questionId") && probe.contains("prediction");
    if (jsonl) {
      std::size_t pos = 0;
      std::size_t line_no = 0;
      while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        ++line_no;
        std::string_view line = std::string_view(content).substr(pos, end - pos);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
          add_prediction_object(preds, report, path_text + ": line " + std::to_string(line_no),
                                path_text, parse_value(line, pos));
        }
        pos = end + 1;
      }
    } else {
      // Walk the object with the callback parser so duplicate keys are seen
      // (a DOM would silently keep one of them).
      std::string key;
      json::parser_callback_t cb = [&](int d, json::parse_event_t event, json& parsed) {
        if (event == json::parse_event_t::key && d == 1) {
          key = parsed.get<std::string>();
        } else if (event == json::parse_event_t::value && d == 1) {
          if (parsed.is_string()) {
            add_prediction(preds, report, path_text, key, parsed.get<std::string>());
          } else {
            ++report.skipped;
            note(report, path_text + ": prediction for '" + key + "' is not a string");
          }
          return false;
        } else if ((event == json::parse_event_t::object_end ||
                    event == json::parse_event_t::array_end) && d == 1) {
          ++report.skipped;
          note(report, path_text + ": prediction for '" + key + "' is not a string");
          return false;
        }
        return true;
      };
      try {
        [[maybe_unused]] const json discarded = json::parse(content, cb);
      } catch (const json::parse_error& e) {
        throw ParseError(path_text, e.byte > 0 ? e.byte - 1 : 0, e.what());
      }
    }
  } else {
    throw ParseError(path_text, start, "expected a JSON object, array or JSON lines");
  }

  if (report_out) *report_out = std::move(report);
  return preds;
}

void write_predictions(const PredictionSet& preds, std::ostream& out) {
  out << '{';
  bool first = true;
  for (const auto& [qid, answer] : preds.entries) {
    if (!first) out << ',';
    first = false;
    out << '\n' << json(qid).dump() << ':' << json(answer).dump();
  }
  out << (first ? "}\n" : "\n}\n");
}

void write_predictions(const PredictionSet& preds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_predictions(preds, out);
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace ood
