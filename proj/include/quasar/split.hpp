#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/record.hpp"
#include "quasar/rng.hpp"

namespace quasar {

// Default evaluation-set sizes per task; records beyond these go to the
// training side used for demonstration generation.
inline const std::map<std::string, size_t>& default_test_counts() {
  static const std::map<std::string, size_t> counts = {
      {"AQuA", 254},    {"GSM8K", 1320}, {"SVAMP", 700}, {"MMLU-Redux", 1000},
      {"OlyBench", 500}, {"GPQA", 198},  {"DROP", 500},
  };
  return counts;
}

struct SplitResult {
  std::vector<TaskRecord> train;
  std::vector<TaskRecord> test;
};

// Seeded uniform split: draws `test_count` records for the test side, the
// rest train. Both sides keep their original file order; the two sides are
// disjoint and together exhaust the input.
inline SplitResult split_records(const std::vector<TaskRecord>& records, size_t test_count,
                                 std::uint64_t seed) {
  if (test_count > records.size()) {
    throw std::invalid_argument("test split larger than dataset: " +
                                std::to_string(test_count) + " > " +
                                std::to_string(records.size()));
  }
  std::mt19937_64 rng(seed);
  std::vector<size_t> perm = random_permutation(rng, records.size());
  std::vector<bool> in_test(records.size(), false);
  for (size_t i = 0; i < test_count; ++i) in_test[perm[i]] = true;
  SplitResult out;
  out.test.reserve(test_count);
  out.train.reserve(records.size() - test_count);
  for (size_t i = 0; i < records.size(); ++i) {
    (in_test[i] ? out.test : out.train).push_back(records[i]);
  }
  return out;
}

}  // namespace quasar
