#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ood {

struct QuestionRecord {
  std::string qid;
  std::string text;
  std::string answer;  // gold answer as stored in the file
  std::string image_id;
  std::optional<std::string> local_group;
  std::optional<std::string> global_group;
  std::string structural_type;
  std::string semantic_type;

  bool operator==(const QuestionRecord&) const = default;
};

// Tallies collected while reading a corpus or prediction file.
struct IngestReport {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::size_t groupless = 0;    // loaded records without a local group
  std::size_t multi_answer = 0; // skipped because `answer` was not a single string
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

// Immutable set of questions. Records are kept sorted by qid and the group
// index is keyed by local group in lexicographic order; within a group the
// record positions are ascending, so all iteration is deterministic.
class QuestionCorpus {
 public:
  QuestionCorpus() = default;
  // Throws DataError on an empty qid, an empty answer, or a duplicate qid.
  QuestionCorpus(std::string split_name, std::vector<QuestionRecord> records);

  const std::string& split_name() const noexcept { return split_name_; }
  std::span<const QuestionRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  const std::map<std::string, std::vector<std::size_t>>& group_index() const noexcept {
    return group_index_;
  }
  bool has_group(const std::string& key) const { return group_index_.contains(key); }
  // Throws LookupError for an unknown key.
  std::vector<std::string> group_qids(const std::string& key) const;

  const QuestionRecord* find(std::string_view qid) const;

  std::size_t groupless_count() const noexcept { return groupless_; }
  std::size_t image_count() const;

  const IngestReport& ingest_report() const noexcept { return report_; }
  void set_ingest_report(IngestReport report) { report_ = std::move(report); }

  bool operator==(const QuestionCorpus& other) const {
    return split_name_ == other.split_name_ && records_ == other.records_;
  }

 private:
  std::string split_name_;
  std::vector<QuestionRecord> records_;
  std::map<std::string, std::vector<std::size_t>> group_index_;
  std::size_t groupless_ = 0;
  IngestReport report_;
};

// Streams a corpus file (JSON object qid -> record). Malformed records are
// skipped and tallied in the corpus' ingest report; a malformed top level
// throws ParseError with the byte offset.
QuestionCorpus parse_question_corpus(const std::filesystem::path& path,
                                     const std::string& split_name);

// Writes the corpus in the same format parse_question_corpus reads.
void write_corpus(const QuestionCorpus& corpus, std::ostream& out);
void write_corpus(const QuestionCorpus& corpus, const std::filesystem::path& path);

struct PredictionSet {
  std::map<std::string, std::string> entries;  // qid -> predicted answer
  std::string source_label;

  // Normalized prediction for `qid`, or nullopt if there is none.
  std::optional<std::string> normalized(const std::string& qid) const;
};

// Reads either a JSON object {qid: answer} or JSON-lines
// {"questionId": ..., "prediction": ...}. A JSON array of such objects is
// accepted as well. Duplicate qids keep the last occurrence and are reported.
PredictionSet parse_predictions(const std::filesystem::path& path,
                                IngestReport* report = nullptr);

// JSON object form, keys sorted.
void write_predictions(const PredictionSet& preds, std::ostream& out);
void write_predictions(const PredictionSet& preds, const std::filesystem::path& path);

}  // namespace ood
