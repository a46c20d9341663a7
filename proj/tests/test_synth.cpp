#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ood/error.hpp"
#include "ood/group_stats.hpp"
#include "ood/synth.hpp"

using namespace ood;

namespace {

SynthConfig single_group(double skew) {
  SynthConfig c;
  c.n_groups = 1;
  c.answers_per_group = {4, 4};
  c.questions_per_group = {100, 100};
  c.skew = {skew, skew};
  c.seed = 7;
  return c;
}

std::string serialized(const QuestionCorpus& corpus) {
  std::ostringstream os;
  write_corpus(corpus, os);
  return os.str();
}

}  // namespace

TEST_CASE("skew 1 gives a uniform group") {
  const auto corpus = generate_synthetic_corpus(single_group(1.0));
  REQUIRE(corpus.group_index().size() == 1);
  const auto dist = answer_distribution(corpus, corpus.group_index().begin()->first);
  CHECK(dist.d() == 4);
  for (const auto& [answer, c] : dist.counts()) CHECK(c == 25);
}

TEST_CASE("skew 0.25 concentrates mass on the modal answer") {
  const auto corpus = generate_synthetic_corpus(single_group(0.25));
  const auto dist = answer_distribution(corpus, corpus.group_index().begin()->first);
  std::uint64_t modal = 0;
  for (const auto& [answer, c] : dist.counts()) modal = std::max(modal, c);
  // mean is 25, so the modal count must exceed 30
  CHECK(modal * dist.d() * 10 > 12 * dist.total());
  CHECK(modal == 73);
}

TEST_CASE("skewed_counts follows the geometric weights") {
  // one question per answer, then 96 spread as 1 : 0.25 : 0.0625 : 0.015625
  CHECK(skewed_counts(4, 100, 0.25) == std::vector<std::uint64_t>{73, 19, 6, 2});
  CHECK(skewed_counts(4, 100, 1.0) == std::vector<std::uint64_t>{25, 25, 25, 25});
  CHECK(skewed_counts(3, 10, 1.0) == std::vector<std::uint64_t>{4, 3, 3});
  CHECK(skewed_counts(5, 3, 0.5) == std::vector<std::uint64_t>{1, 1, 1});
  const auto counts = skewed_counts(7, 333, 0.6);
  CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 333);
  CHECK(std::is_sorted(counts.rbegin(), counts.rend()));
}

TEST_CASE("same seed, same bytes; different seed, different corpus") {
  const auto a = generate_synthetic_corpus(single_group(0.25));
  const auto b = generate_synthetic_corpus(single_group(0.25));
  CHECK(serialized(a) == serialized(b));
  auto other = single_group(0.25);
  other.seed = 8;
  CHECK(serialized(generate_synthetic_corpus(other)) != serialized(a));
}

TEST_CASE("sizes add up and qids are unique for many seeds") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    SynthConfig c;
    c.n_groups = 40;
    c.answers_per_group = {1, 9};
    c.questions_per_group = {1, 60};
    c.skew = {0.1, 1.0};
    c.seed = seed;
    const auto corpus = generate_synthetic_corpus(c);
    std::size_t sum = 0;
    for (const auto& [key, members] : corpus.group_index()) sum += members.size();
    CHECK(sum == corpus.size());
    std::set<std::string> qids;
    for (const auto& r : corpus.records()) qids.insert(r.qid);
    CHECK(qids.size() == corpus.size());
    CHECK(corpus.group_index().size() == 40);
  }
}

TEST_CASE("structural tags come from the fixed set") {
  SynthConfig c;
  c.n_groups = 20;
  c.seed = 1;
  const auto corpus = generate_synthetic_corpus(c);
  std::set<std::string> seen;
  for (const auto& r : corpus.records()) seen.insert(r.structural_type);
  const std::set<std::string> allowed(std::begin(kStructuralTypes), std::end(kStructuralTypes));
  CHECK(seen == allowed);
}

TEST_CASE("degenerate ranges are configuration errors") {
  SynthConfig c;
  c.answers_per_group = {5, 2};
  CHECK_THROWS_AS(generate_synthetic_corpus(c), ConfigError);
  c = SynthConfig{};
  c.questions_per_group = {0, 0};
  CHECK_THROWS_AS(generate_synthetic_corpus(c), ConfigError);
  c = SynthConfig{};
  c.skew = {0.0, 0.5};
  CHECK_THROWS_AS(generate_synthetic_corpus(c), ConfigError);
  c = SynthConfig{};
  c.skew = {0.5, 1.5};
  CHECK_THROWS_AS(generate_synthetic_corpus(c), ConfigError);
  c = SynthConfig{};
  c.n_groups = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(c), ConfigError);
}
