#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ood/corpus.hpp"
#include "ood/random.hpp"

namespace ood::testing {

// Scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("oodbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = file(name);
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline QuestionRecord record(std::string qid, std::string answer, std::string group,
                             std::string type = "query") {
  QuestionRecord r;
  r.qid = std::move(qid);
  r.text = "question " + r.qid;
  r.answer = std::move(answer);
  r.image_id = "img-" + r.qid;
  r.local_group = group;
  r.global_group = "global-" + group;
  r.structural_type = std::move(type);
  r.semantic_type = "attr";
  return r;
}

// One group per entry: (group key, {answer, count}...). Question ids are
// "<group>-<n>".
using GroupSpec = std::pair<std::string, std::vector<std::pair<std::string, int>>>;

inline QuestionCorpus corpus_from(const std::vector<GroupSpec>& groups,
                                  const std::string& type = "query") {
  std::vector<QuestionRecord> records;
  for (const auto& [key, answers] : groups) {
    int n = 0;
    for (const auto& [answer, count] : answers) {
      for (int i = 0; i < count; ++i) {
        records.push_back(record(key + "-" + std::to_string(n++), answer, key, type));
      }
    }
  }
  return QuestionCorpus("test", std::move(records));
}

// Random histogram with `d` classes and counts in [1, max_count].
inline std::vector<std::uint64_t> random_counts(Rng& rng, std::uint64_t d, std::uint64_t max_count) {
  std::vector<std::uint64_t> counts(d);
  for (auto& c : counts) c = rng.between(1, max_count);
  return counts;
}

}  // namespace ood::testing
