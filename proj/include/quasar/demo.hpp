#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "quasar/evaluation.hpp"
#include "quasar/gateway.hpp"
#include "quasar/jsonl.hpp"
#include "quasar/prompt.hpp"
#include "quasar/record.hpp"
#include "quasar/rng.hpp"
#include "quasar/sha256.hpp"
#include "quasar/trace.hpp"

namespace quasar {

// Default per-task export caps for demonstration balancing.
inline const std::map<std::string, size_t>& default_demo_caps() {
  static const std::map<std::string, size_t> caps = {
      {"AQuA", 1000},
      {"GSM8K", 800},
      {"OlyBench", 250},
      {"DROP", 350},
  };
  return caps;
}

struct Demonstration {
  TaskRecord record;
  ReasoningTrace trace;
  std::string teacher_endpoint;
  bool generation_ok = false;
  std::string error;
  bool passed_exact_gate = false;
  std::optional<bool> passed_step_gate;  // set only for exact-gate survivors
  std::optional<std::string> judge_step_verdict_raw;
};

struct FilterStats {
  size_t generated = 0;
  size_t exact_pass = 0;
  size_t step_pass = 0;
  size_t undecided = 0;  // judge failed; excluded from export
  size_t exported = 0;
  std::map<std::string, size_t> exported_per_task;
  std::vector<std::string> warnings;

  Json to_json() const {
    Json per_task = Json::object();
    for (const auto& [task, count] : exported_per_task) per_task[task] = count;
    return Json{{"generated", generated},   {"exact_pass", exact_pass},
                {"step_pass", step_pass},   {"undecided", undecided},
                {"exported", exported},     {"exported_per_task", per_task},
                {"warnings", warnings}};
  }
};

// One teacher completion per record. Failures become failed demonstrations
// (empty trace), never exceptions, so a long generation run survives flaky
// items.
inline std::vector<Demonstration> generate_demonstrations(
    const std::vector<TaskRecord>& records, const ModelEndpoint& teacher,
    const StrategyVariant& variant, Gateway& gateway, const PromptLibrary& prompts) {
  std::vector<std::string> rendered;
  rendered.reserve(records.size());
  for (const auto& record : records) {
    rendered.push_back(prompts.render(variant, record.question_text()).full_text);
  }
  std::vector<ChatExchange> replies = gateway.complete_batch(teacher, rendered);
  std::vector<Demonstration> demos;
  demos.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    Demonstration demo;
    demo.record = records[i];
    demo.teacher_endpoint = teacher.name;
    demo.generation_ok = replies[i].ok;
    if (replies[i].ok) {
      demo.trace = parse_trace(replies[i].response);
    } else {
      demo.error = replies[i].error;
      demo.trace = parse_trace(std::string());
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

struct GatePartition {
  std::vector<Demonstration> kept;
  std::vector<Demonstration> dropped;
};

// First gate: the teacher's final answer must exactly match the gold one.
// Unparseable answers drop.
inline GatePartition filter_exact(std::vector<Demonstration> demos,
                                  const Decimal& numeric_eps = Decimal(0)) {
  GatePartition out;
  for (auto& demo : demos) {
    auto predicted = extract_final_answer(demo.trace.raw, demo.record.kind);
    bool pass = false;
    if (predicted) pass = score_exact(*predicted, demo.record.gold, numeric_eps).match;
    demo.passed_exact_gate = pass;
    (pass ? out.kept : out.dropped).push_back(std::move(demo));
  }
  return out;
}

struct StepGateResult {
  std::vector<Demonstration> kept;
  std::vector<Demonstration> dropped;
  std::vector<Demonstration> undecided;  // judge transport/contract failures
};

inline bool check_step_presence(const ReasoningTrace& trace, const std::set<int>& required) {
  for (int step : required) {
    if (!trace.has_section(step) || trim(trace.section_body(step)).empty()) return false;
  }
  return true;
}

// Four section texts in protocol order, blank-line separated; the exported
// reasoning body.
inline std::string demonstration_alpha(const ReasoningTrace& trace) {
  std::string alpha;
  for (int step = 1; step <= kStepCount; ++step) {
    if (!trace.has_section(step)) {
      throw std::invalid_argument("trace is missing step " + std::to_string(step));
    }
    if (!alpha.empty()) alpha += "\n\n";
    alpha += trace.section_text(step);
  }
  return alpha;
}

// Second gate, exact-gate survivors only. The free structural check runs
// first; only structural survivors spend a judge call. A judge that cannot
// deliver a verdict parks the demo as undecided rather than keeping it.
inline StepGateResult filter_steps(std::vector<Demonstration> demos, JudgeContext* judge,
                                   const std::set<int>& required = {1, 2, 3, 4}) {
  StepGateResult out;
  for (auto& demo : demos) {
    if (!demo.passed_exact_gate) {
      throw std::invalid_argument(demo.record.id + ": step gate before exact gate");
    }
    if (!check_step_presence(demo.trace, required)) {
      demo.passed_step_gate = false;
      out.dropped.push_back(std::move(demo));
      continue;
    }
    if (!judge || !judge->gateway || !judge->prompts) {
      demo.passed_step_gate = true;
      out.kept.push_back(std::move(demo));
      continue;
    }
    try {
      std::string prompt = judge->prompts->render_judge(demonstration_alpha(demo.trace),
                                                        demo.record.judge_target_text());
      ChatExchange reply = judge->gateway->complete(judge->endpoint, prompt);
      demo.judge_step_verdict_raw = reply.response;
      auto verdict = parse_judge_verdict(reply.response);
      if (!verdict) {
        demo.error = "judge verdict outside 0/1 contract: " + trim(reply.response);
        out.undecided.push_back(std::move(demo));
        continue;
      }
      demo.passed_step_gate = *verdict;
      (*verdict ? out.kept : out.dropped).push_back(std::move(demo));
    } catch (const std::exception& e) {
      demo.error = e.what();
      out.undecided.push_back(std::move(demo));
    }
  }
  return out;
}

struct TrainingExample {
  std::string question;
  std::string alpha;
  std::string target;
  std::string task;
  std::string source_id;
  std::string teacher;

  Json to_json() const {
    return Json{{"question", question}, {"alpha", alpha},   {"target", target},
                {"task", task},         {"source_id", source_id}, {"teacher", teacher}};
  }
};

inline TrainingExample make_training_example(const Demonstration& demo) {
  TrainingExample example;
  example.question = demo.record.question_text();
  example.alpha = demonstration_alpha(demo.trace);
  example.target = example.alpha + "\n\nThe answer is " + demo.record.gold.display();
  example.task = demo.record.task;
  example.source_id = demo.record.id;
  example.teacher = demo.teacher_endpoint;
  return example;
}

struct ExportResult {
  FilterStats stats;
  std::filesystem::path export_path;
  std::string export_sha256;
  std::vector<TrainingExample> examples;
};

// Per-task seeded uniform downsampling to the cap, then export. Tasks whose
// kept pool is under the cap export everything with a warning. File order is
// deterministic: tasks alphabetically, items in generation order.
inline ExportResult balance_and_export(const std::vector<Demonstration>& kept,
                                       const std::map<std::string, size_t>& caps,
                                       std::uint64_t seed,
                                       const std::filesystem::path& out_path) {
  std::map<std::string, std::vector<const Demonstration*>> by_task;
  for (const auto& demo : kept) by_task[demo.record.task].push_back(&demo);

  ExportResult result;
  for (const auto& [task, pool] : by_task) {
    size_t cap = pool.size();
    auto it = caps.find(task);
    if (it != caps.end()) cap = it->second;
    size_t take = std::min(cap, pool.size());
    if (cap > pool.size()) {
      result.stats.warnings.push_back(task + ": cap " + std::to_string(cap) + " exceeds " +
                                      std::to_string(pool.size()) + " kept demonstrations");
    }
    std::string salt_hex = sha256_hex(task).substr(0, 16);
    std::uint64_t salt = 0;
    for (char c : salt_hex) salt = salt * 16 + (c <= '9' ? c - '0' : c - 'a' + 10);
    std::mt19937_64 rng(mix_seed(seed, salt));
    std::vector<size_t> perm = random_permutation(rng, pool.size());
    std::vector<size_t> selected(perm.begin(), perm.begin() + static_cast<long>(take));
    std::sort(selected.begin(), selected.end());
    for (size_t index : selected) {
      result.examples.push_back(make_training_example(*pool[index]));
    }
    result.stats.exported_per_task[task] = take;
    result.stats.exported += take;
  }

  std::string content;
  for (const auto& example : result.examples) {
    content += example.to_json().dump();
    content += '\n';
  }
  std::filesystem::create_directories(out_path.parent_path());
  atomic_write_file(out_path, content);
  result.export_path = out_path;
  result.export_sha256 = sha256_hex(content);
  return result;
}

inline void write_demo_manifest(const std::filesystem::path& path,
                                const std::map<std::string, size_t>& caps, std::uint64_t seed,
                                const FilterStats& stats, const ExportResult& result) {
  Json caps_json = Json::object();
  for (const auto& [task, cap] : caps) caps_json[task] = cap;
  Json manifest{{"caps", caps_json},
                {"seed", seed},
                {"stats", stats.to_json()},
                {"export_file", result.export_path.filename().string()},
                {"export_sha256", result.export_sha256},
                {"rows", result.examples.size()}};
  atomic_write_file(path, manifest.dump(2) + "\n");
}

}  // namespace quasar
