#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/record.hpp"
#include "quasar/rng.hpp"
#include "quasar/sha256.hpp"

namespace quasar {

// Reorders the option list of a multiple-choice record. `perm[i]` names the
// old position whose text moves to new position i; labels are reassigned
// A, B, C, ... in the new order and the gold label follows its text.
inline TaskRecord apply_choice_permutation(const TaskRecord& record,
                                           const std::vector<size_t>& perm,
                                           const std::string& id_suffix) {
  if (record.kind != AnswerKind::kChoice) {
    throw std::invalid_argument(record.id + ": not a multiple-choice record");
  }
  if (perm.size() != record.choices.size()) {
    throw std::invalid_argument(record.id + ": permutation size mismatch");
  }
  std::vector<bool> used(perm.size(), false);
  for (size_t p : perm) {
    if (p >= perm.size() || used[p]) {
      throw std::invalid_argument(record.id + ": not a permutation");
    }
    used[p] = true;
  }
  size_t gold_index = static_cast<size_t>(record.gold.choice_label - 'A');
  TaskRecord out = record;
  out.id += id_suffix;
  out.choices.clear();
  for (size_t i = 0; i < perm.size(); ++i) {
    char label = static_cast<char>('A' + i);
    out.choices.push_back({label, record.choices[perm[i]].text});
    if (perm[i] == gold_index) out.gold = FinalAnswer::choice(label);
  }
  out.validate();
  return out;
}

// Deterministic seeded shuffle: the same (seed, record id) pair always maps
// to the same option order, independent of platform.
inline TaskRecord shuffle_choices(const TaskRecord& record, std::uint64_t seed) {
  std::string digest = sha256_hex(record.id);
  std::uint64_t salt = 0;
  for (int i = 0; i < 16; ++i) {
    char c = digest[i];
    salt = salt * 16 + static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  std::mt19937_64 rng(mix_seed(seed, salt));
  std::vector<size_t> perm = random_permutation(rng, record.choices.size());
  return apply_choice_permutation(record, perm, "::shuf" + std::to_string(seed));
}

inline std::vector<TaskRecord> shuffle_choices(const std::vector<TaskRecord>& records,
                                               std::uint64_t seed) {
  std::vector<TaskRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(shuffle_choices(r, seed));
  return out;
}

}  // namespace quasar
