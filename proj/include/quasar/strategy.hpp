#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/rng.hpp"

namespace quasar {

inline constexpr int kStepCount = 4;

inline const char* step_name(int step) {
  switch (step) {
    case 1: return "Abstraction";
    case 2: return "Formalisation";
    case 3: return "Explanation";
    case 4: return "Answering";
    default: throw std::invalid_argument("step index out of range");
  }
}

enum class StrategyKind { kBaseline, kCot, kQuasar };

// A prompting strategy: the plain question, chain-of-thought, or the
// four-step structured protocol, optionally with steps omitted and/or
// presented in a non-canonical order.
struct StrategyVariant {
  StrategyKind kind = StrategyKind::kQuasar;
  std::set<int> omitted_steps;      // subset of {1..4}; empty unless kQuasar
  std::vector<int> step_order;      // retained steps in presentation order
  std::optional<std::uint64_t> shuffle_seed;

  static StrategyVariant baseline() {
    StrategyVariant v;
    v.kind = StrategyKind::kBaseline;
    return v;
  }

  static StrategyVariant cot() {
    StrategyVariant v;
    v.kind = StrategyKind::kCot;
    return v;
  }

  static StrategyVariant quasar() { return quasar_without({}); }

  static StrategyVariant quasar_without(const std::set<int>& omitted) {
    StrategyVariant v;
    v.kind = StrategyKind::kQuasar;
    v.omitted_steps = omitted;
    for (int s = 1; s <= kStepCount; ++s) {
      if (!omitted.count(s)) v.step_order.push_back(s);
    }
    v.validate();
    return v;
  }

  // All four steps present, order drawn deterministically from the seed.
  static StrategyVariant quasar_shuffled(std::uint64_t seed) {
    StrategyVariant v;
    v.kind = StrategyKind::kQuasar;
    v.step_order = {1, 2, 3, 4};
    std::mt19937_64 rng(seed);
    fisher_yates(rng, v.step_order);
    v.shuffle_seed = seed;
    v.validate();
    return v;
  }

  std::vector<int> retained_steps() const {
    std::vector<int> steps;
    for (int s = 1; s <= kStepCount; ++s) {
      if (!omitted_steps.count(s)) steps.push_back(s);
    }
    return steps;
  }

  bool is_canonical_order() const {
    return std::is_sorted(step_order.begin(), step_order.end());
  }

  void validate() const {
    if (kind != StrategyKind::kQuasar) {
      if (!omitted_steps.empty() || !step_order.empty()) {
        throw std::invalid_argument("step structure is only meaningful for the step protocol");
      }
      return;
    }
    for (int s : omitted_steps) {
      if (s < 1 || s > kStepCount) throw std::invalid_argument("omitted step out of range");
    }
    if (omitted_steps.size() >= kStepCount) {
      throw std::invalid_argument("cannot omit every step");
    }
    std::vector<int> sorted = step_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != retained_steps()) {
      throw std::invalid_argument("step order must permute exactly the retained steps");
    }
  }

  // Stable identifier used in file names and config strings.
  std::string id() const {
    switch (kind) {
      case StrategyKind::kBaseline: return "baseline";
      case StrategyKind::kCot: return "cot";
      case StrategyKind::kQuasar: break;
    }
    std::string out = "quasar";
    if (!omitted_steps.empty()) {
      out += "_wo";
      for (int s : omitted_steps) out += static_cast<char>('0' + s);
    }
    if (shuffle_seed) {
      out += "_shuf" + std::to_string(*shuffle_seed);
    } else if (!is_canonical_order()) {
      out += "_ord";
      for (int s : step_order) out += static_cast<char>('0' + s);
    }
    return out;
  }

  // Human-facing label used in report tables.
  std::string label() const {
    switch (kind) {
      case StrategyKind::kBaseline: return "Baseline";
      case StrategyKind::kCot: return "CoT";
      case StrategyKind::kQuasar: break;
    }
    if (omitted_steps.empty() && !shuffle_seed && is_canonical_order()) return "QuaSAR";
    if (!omitted_steps.empty()) {
      std::vector<int> omitted(omitted_steps.begin(), omitted_steps.end());
      bool contiguous = omitted.back() - omitted.front() + 1 == static_cast<int>(omitted.size());
      std::string inner;
      if (contiguous && omitted.size() > 1) {
        inner = std::to_string(omitted.front()) + "-" + std::to_string(omitted.back());
      } else {
        for (size_t i = 0; i < omitted.size(); ++i) {
          if (i > 0) inner += ",";
          inner += std::to_string(omitted[i]);
        }
      }
      return "w/o(" + inner + ")";
    }
    if (shuffle_seed) return "shuffled(seed=" + std::to_string(*shuffle_seed) + ")";
    std::string order;
    for (int s : step_order) order += static_cast<char>('0' + s);
    return "order(" + order + ")";
  }
};

// The fixed ablation grid: full protocol plus the six step-omission variants.
inline std::vector<StrategyVariant> ablation_variants() {
  return {
      StrategyVariant::quasar(),
      StrategyVariant::quasar_without({1}),
      StrategyVariant::quasar_without({2}),
      StrategyVariant::quasar_without({3}),
      StrategyVariant::quasar_without({4}),
      StrategyVariant::quasar_without({1, 2}),
      StrategyVariant::quasar_without({3, 4}),
  };
}

inline StrategyVariant parse_strategy_id(const std::string& id) {
  if (id == "baseline") return StrategyVariant::baseline();
  if (id == "cot") return StrategyVariant::cot();
  if (id == "quasar") return StrategyVariant::quasar();
  const std::string wo = "quasar_wo";
  const std::string shuf = "quasar_shuf";
  if (id.rfind(wo, 0) == 0) {
    std::set<int> omitted;
    for (size_t i = wo.size(); i < id.size(); ++i) {
      if (id[i] < '1' || id[i] > '4') throw std::invalid_argument("bad strategy id: " + id);
      omitted.insert(id[i] - '0');
    }
    if (omitted.empty()) throw std::invalid_argument("bad strategy id: " + id);
    return StrategyVariant::quasar_without(omitted);
  }
  if (id.rfind(shuf, 0) == 0) {
    std::string digits = id.substr(shuf.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad strategy id: " + id);
    }
    return StrategyVariant::quasar_shuffled(std::stoull(digits));
  }
  throw std::invalid_argument("unknown strategy id: " + id);
}

}  // namespace quasar
