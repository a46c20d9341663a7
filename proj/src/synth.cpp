#include "ood/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ood/error.hpp"
#include "ood/random.hpp"

namespace ood {

namespace {

constexpr std::array<const char*, 40> kVocabulary = {
    "red",    "blue",   "green",  "white",  "black",   "yellow", "brown",  "gray",
    "orange", "pink",   "purple", "left",   "right",   "yes",    "no",     "wood",
    "metal",  "glass",  "plastic", "table", "chair",   "shelf",  "picture", "clock",
    "star",   "mirror", "window", "door",   "car",     "bike",   "bridge", "tree",
    "grass",  "sky",    "water",  "snow",   "man",     "woman",  "dog",    "cat"};

constexpr std::array<const char*, 5> kSemanticTypes = {"obj", "attr", "rel", "cat", "global"};

std::string answer_name(std::uint64_t k) {
  std::string name = kVocabulary[k % kVocabulary.size()];
  if (k >= kVocabulary.size()) name += "-" + std::to_string(k / kVocabulary.size());
  return name;
}

std::string padded(std::uint64_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*llu", width, static_cast<unsigned long long>(value));
  return buf;
}

int digits(std::uint64_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

void validate(const SynthConfig& c) {
  if (c.n_groups == 0) throw ConfigError("synthetic corpus: n_groups must be positive");
  if (c.answers_per_group.lo == 0 || c.answers_per_group.lo > c.answers_per_group.hi) {
    throw ConfigError("synthetic corpus: empty answers-per-group range");
  }
  if (c.questions_per_group.lo == 0 || c.questions_per_group.lo > c.questions_per_group.hi) {
    throw ConfigError("synthetic corpus: empty questions-per-group range");
  }
  if (!(c.skew.lo > 0.0) || !(c.skew.hi <= 1.0) || c.skew.lo > c.skew.hi) {
    throw ConfigError("synthetic corpus: skew range must lie in (0, 1] and be non-empty");
  }
  if (c.locals_per_global == 0) {
    throw ConfigError("synthetic corpus: locals_per_global must be positive");
  }
}

std::vector<std::uint64_t> skewed_counts(std::uint64_t answers, std::uint64_t questions,
                                         double skew) {
  const std::uint64_t d = std::min(answers, questions);
  std::vector<std::uint64_t> counts(d, 1);
  if (d == 0) return counts;

  std::vector<double> weights(d);
  double w = 1.0;
  for (std::uint64_t i = 0; i < d; ++i) {
    weights[i] = w;
    w *= skew;
  }
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);

  const std::uint64_t extra = questions - d;
  std::vector<double> remainders(d);
  std::uint64_t assigned = 0;
  for (std::uint64_t i = 0; i < d; ++i) {
    const double share = static_cast<double>(extra) * weights[i] / weight_sum;
    const auto whole = static_cast<std::uint64_t>(std::floor(share));
    counts[i] += whole;
    assigned += whole;
    remainders[i] = share - static_cast<double>(whole);
  }
  std::vector<std::uint64_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::uint64_t k = 0; assigned < extra; ++k, ++assigned) {
    ++counts[order[k % d]];
  }
  return counts;
}

QuestionCorpus generate_synthetic_corpus(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  const int group_width = std::max(5, digits(config.n_groups - 1));
  const int question_width = std::max(4, digits(config.questions_per_group.hi - 1));

  std::vector<QuestionRecord> records;
  for (std::uint64_t g = 0; g < config.n_groups; ++g) {
    const std::uint64_t answers = rng.between(config.answers_per_group.lo, config.answers_per_group.hi);
    const std::uint64_t questions =
        rng.between(config.questions_per_group.lo, config.questions_per_group.hi);
    const double skew = config.skew.lo + (config.skew.hi - config.skew.lo) * rng.uniform();
    const std::vector<std::uint64_t> counts = skewed_counts(answers, questions, skew);

    std::vector<std::uint64_t> slots;
    slots.reserve(questions);
    for (std::uint64_t i = 0; i < counts.size(); ++i) slots.insert(slots.end(), counts[i], i);
    for (std::uint64_t i = slots.size(); i > 1; --i) {
      std::swap(slots[i - 1], slots[rng.between(0, i - 1)]);
    }

    const std::string local = "group-" + padded(g, group_width);
    const std::string global = "global-" + padded(g / config.locals_per_global, group_width);
    for (std::uint64_t j = 0; j < slots.size(); ++j) {
      QuestionRecord r;
      r.qid = "syn" + padded(g, group_width) + "-" + padded(j, question_width);
      r.answer = answer_name(g * 3 + slots[j]);
      r.text = "synthetic question " + std::to_string(j) + " about " + local;
      r.image_id = "img" + padded(g, group_width) + "-" + std::to_string(j % 7);
      r.local_group = local;
      r.global_group = global;
      r.structural_type = kStructuralTypes[rng.between(0, std::size(kStructuralTypes) - 1)];
      r.semantic_type = kSemanticTypes[rng.between(0, kSemanticTypes.size() - 1)];
      records.push_back(std::move(r));
    }
  }
  return QuestionCorpus(config.split_name, std::move(records));
}

}  // namespace ood
