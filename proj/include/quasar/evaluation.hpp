#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/gateway.hpp"
#include "quasar/jsonl.hpp"
#include "quasar/prompt.hpp"
#include "quasar/record.hpp"
#include "quasar/trace.hpp"

namespace quasar {

enum class EvalMethod { kExactMatch, kJudge, kNoAnswer };

inline const char* eval_method_name(EvalMethod m) {
  switch (m) {
    case EvalMethod::kExactMatch: return "exact";
    case EvalMethod::kJudge: return "judge";
    case EvalMethod::kNoAnswer: return "no_answer";
  }
  return "unknown";
}

inline EvalMethod parse_eval_method(std::string_view name) {
  if (name == "exact") return EvalMethod::kExactMatch;
  if (name == "judge") return EvalMethod::kJudge;
  if (name == "no_answer") return EvalMethod::kNoAnswer;
  throw std::invalid_argument("unknown eval method: " + std::string(name));
}

struct ExactScore {
  bool match = false;
  bool kind_mismatch = false;
};

// Kind-aware exact comparison. Mismatched kinds score false with a flag
// rather than throwing: that a model answered "B" to a numeric question is a
// result, not a harness failure.
inline ExactScore score_exact(const FinalAnswer& predicted, const FinalAnswer& gold,
                              const Decimal& numeric_eps = Decimal(0)) {
  ExactScore score;
  if (predicted.kind != gold.kind) {
    score.kind_mismatch = true;
    return score;
  }
  switch (gold.kind) {
    case AnswerKind::kNumeric:
      score.match = (predicted.numeric_value - gold.numeric_value).abs() <= numeric_eps;
      break;
    case AnswerKind::kChoice:
      score.match = predicted.choice_label == gold.choice_label;
      break;
    case AnswerKind::kFreeText:
      score.match = to_lower(normalize_free_text(predicted.text_value)) ==
                    to_lower(normalize_free_text(gold.text_value));
      break;
  }
  return score;
}

struct EvalOutcome {
  std::string record_id;
  std::string task;
  std::string strategy_id;
  std::string raw_completion;
  std::optional<FinalAnswer> predicted;
  bool correct = false;
  EvalMethod method = EvalMethod::kNoAnswer;
  bool kind_mismatch = false;
  bool judge_error = false;      // judge reply violated the 0/1 contract or failed
  std::string error;             // transport-level failure for this item, if any
  bool trace_complete = false;   // all four protocol sections present
  bool trace_ordered = false;
};

inline Json final_answer_to_json(const FinalAnswer& answer) {
  return Json{{"kind", answer_kind_name(answer.kind)}, {"value", answer.display()}};
}

inline FinalAnswer final_answer_from_json(const Json& j) {
  AnswerKind kind = parse_answer_kind(j.at("kind").get<std::string>());
  std::string value = j.at("value").get<std::string>();
  switch (kind) {
    case AnswerKind::kNumeric: return FinalAnswer::numeric(Decimal::parse(value));
    case AnswerKind::kChoice:
      if (value.size() != 1) throw std::invalid_argument("bad choice payload: " + value);
      return FinalAnswer::choice(value[0]);
    case AnswerKind::kFreeText: return FinalAnswer::free_text(value);
  }
  throw std::invalid_argument("bad answer kind");
}

// Persistence format for outcome files. Deliberately free of timestamps and
// latency so repeat runs stay byte-identical.
inline Json outcome_to_json(const EvalOutcome& o) {
  Json j{{"record_id", o.record_id},
         {"task", o.task},
         {"strategy", o.strategy_id},
         {"raw_completion", o.raw_completion},
         {"correct", o.correct},
         {"method", eval_method_name(o.method)},
         {"kind_mismatch", o.kind_mismatch},
         {"judge_error", o.judge_error},
         {"error", o.error},
         {"trace_complete", o.trace_complete},
         {"trace_ordered", o.trace_ordered}};
  if (o.predicted) j["predicted"] = final_answer_to_json(*o.predicted);
  return j;
}

inline EvalOutcome outcome_from_json(const Json& j) {
  EvalOutcome o;
  o.record_id = j.at("record_id").get<std::string>();
  o.task = j.at("task").get<std::string>();
  o.strategy_id = j.at("strategy").get<std::string>();
  o.raw_completion = j.at("raw_completion").get<std::string>();
  o.correct = j.at("correct").get<bool>();
  o.method = parse_eval_method(j.at("method").get<std::string>());
  o.kind_mismatch = j.at("kind_mismatch").get<bool>();
  o.judge_error = j.at("judge_error").get<bool>();
  o.error = j.at("error").get<std::string>();
  o.trace_complete = j.at("trace_complete").get<bool>();
  o.trace_ordered = j.at("trace_ordered").get<bool>();
  if (j.contains("predicted")) o.predicted = final_answer_from_json(j.at("predicted"));
  return o;
}

struct EvalOptions {
  bool judge_enabled = false;
  Decimal numeric_eps{0};
};

struct JudgeContext {
  Gateway* gateway = nullptr;
  const PromptLibrary* prompts = nullptr;
  ModelEndpoint endpoint;
};

// Strict verdict parse: the reply, trimmed, must be exactly "0" or "1".
inline std::optional<bool> parse_judge_verdict(std::string_view reply) {
  std::string_view t = trim_view(reply);
  if (t == "1") return true;
  if (t == "0") return false;
  return std::nullopt;
}

// Scores one completion: exact match first, judge only on a miss (or when
// extraction produced nothing usable) and only when enabled. The judge sees
// the raw generated text and the gold target.
inline EvalOutcome evaluate_completion(const TaskRecord& record, const std::string& strategy_id,
                                       const std::string& completion, const EvalOptions& options,
                                       JudgeContext* judge = nullptr) {
  EvalOutcome outcome;
  outcome.record_id = record.id;
  outcome.task = record.task;
  outcome.strategy_id = strategy_id;
  outcome.raw_completion = completion;

  ReasoningTrace trace = parse_trace(completion);
  outcome.trace_complete = trace.complete();
  outcome.trace_ordered = trace.ordered_correctly && trace.complete();

  outcome.predicted = extract_final_answer(completion, record.kind);
  bool exact_hit = false;
  if (outcome.predicted) {
    ExactScore score = score_exact(*outcome.predicted, record.gold, options.numeric_eps);
    outcome.kind_mismatch = score.kind_mismatch;
    exact_hit = score.match;
  }
  if (exact_hit) {
    outcome.correct = true;
    outcome.method = EvalMethod::kExactMatch;
    return outcome;
  }

  bool judge_available = options.judge_enabled && judge && judge->gateway && judge->prompts;
  if (judge_available && !trim(completion).empty()) {
    outcome.method = EvalMethod::kJudge;
    try {
      std::string prompt = judge->prompts->render_judge(completion, record.judge_target_text());
      ChatExchange reply = judge->gateway->complete(judge->endpoint, prompt);
      auto verdict = parse_judge_verdict(reply.response);
      if (!verdict) {
        outcome.judge_error = true;
        outcome.correct = false;
      } else {
        outcome.correct = *verdict;
      }
    } catch (const std::exception& e) {
      outcome.judge_error = true;
      outcome.correct = false;
      outcome.error = e.what();
    }
    return outcome;
  }

  outcome.method = outcome.predicted ? EvalMethod::kExactMatch : EvalMethod::kNoAnswer;
  outcome.correct = false;
  return outcome;
}

struct AccuracyReport {
  std::string task;
  std::string strategy_id;
  size_t n = 0;
  size_t n_correct = 0;
  size_t n_exact = 0;      // decided correct by exact match
  size_t n_judge = 0;      // decided (either way) by the judge
  size_t n_no_answer = 0;
  size_t n_judge_errors = 0;
  Decimal accuracy;        // n_correct / n, exact

  std::string key() const { return task + "\x1f" + strategy_id; }
};

// Exact counting per (task, strategy); deterministic order, permutation
// invariant over the input.
inline std::vector<AccuracyReport> aggregate(const std::vector<EvalOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("cannot aggregate zero outcomes");
  std::map<std::pair<std::string, std::string>, AccuracyReport> groups;
  for (const auto& outcome : outcomes) {
    AccuracyReport& report = groups[{outcome.task, outcome.strategy_id}];
    report.task = outcome.task;
    report.strategy_id = outcome.strategy_id;
    ++report.n;
    if (outcome.correct) ++report.n_correct;
    if (outcome.method == EvalMethod::kExactMatch && outcome.correct) ++report.n_exact;
    if (outcome.method == EvalMethod::kJudge) ++report.n_judge;
    if (outcome.method == EvalMethod::kNoAnswer) ++report.n_no_answer;
    if (outcome.judge_error) ++report.n_judge_errors;
  }
  std::vector<AccuracyReport> out;
  out.reserve(groups.size());
  for (auto& [key, report] : groups) {
    report.accuracy = Decimal(static_cast<std::int64_t>(report.n_correct),
                              static_cast<std::int64_t>(report.n));
    out.push_back(std::move(report));
  }
  return out;
}

// Signed accuracy difference in percentage points, exact.
inline Decimal robustness_delta(const AccuracyReport& base, const AccuracyReport& perturbed) {
  if (base.task != perturbed.task || base.strategy_id != perturbed.strategy_id) {
    throw std::invalid_argument("robustness delta across different groups: " + base.key() +
                                " vs " + perturbed.key());
  }
  return (perturbed.accuracy - base.accuracy) * Decimal(100);
}

struct StepAnnotation {
  std::string record_id;
  std::optional<int> first_error_step;  // 1..4, absent = trace fully correct
  std::set<int> step_flags;             // every step judged flawed

  void validate() const {
    for (int s : step_flags) {
      if (s < 1 || s > kStepCount) {
        throw std::invalid_argument(record_id + ": step flag out of range");
      }
    }
    if (first_error_step) {
      if (*first_error_step < 1 || *first_error_step > kStepCount) {
        throw std::invalid_argument(record_id + ": first error step out of range");
      }
      if (step_flags.empty()) {
        throw std::invalid_argument(record_id + ": first error set but no step flags");
      }
      if (!step_flags.count(*first_error_step) || *step_flags.begin() != *first_error_step) {
        throw std::invalid_argument(record_id + ": first error must be the earliest flag");
      }
    } else if (!step_flags.empty()) {
      throw std::invalid_argument(record_id + ": step flags set but no first error");
    }
  }
};

struct StepErrorReport {
  size_t total = 0;
  std::array<size_t, kStepCount + 1> isolated_counts{};  // index 1..4, overlapping flags
  std::array<size_t, kStepCount + 1> first_counts{};     // first error at step k

  // Share of all traces flagged at step k, overlaps allowed.
  Decimal isolated_rate(int step) const {
    return Decimal(static_cast<std::int64_t>(isolated_counts.at(step)),
                   static_cast<std::int64_t>(total));
  }

  // Share of all traces whose first error is at step <= k.
  Decimal cumulative_rate(int step) const {
    size_t sum = 0;
    for (int k = 1; k <= step; ++k) sum += first_counts.at(k);
    return Decimal(static_cast<std::int64_t>(sum), static_cast<std::int64_t>(total));
  }

  Decimal total_failure_rate() const { return cumulative_rate(kStepCount); }
};

inline StepErrorReport error_propagation(const std::vector<StepAnnotation>& annotations) {
  if (annotations.empty()) throw std::invalid_argument("no annotations");
  StepErrorReport report;
  report.total = annotations.size();
  for (const auto& a : annotations) {
    a.validate();
    for (int s : a.step_flags) ++report.isolated_counts.at(s);
    if (a.first_error_step) ++report.first_counts.at(*a.first_error_step);
  }
  return report;
}

// Annotation derived purely from trace structure: a step is flagged when its
// section is missing or empty. A starting point for manual review, not a
// substitute for it.
inline StepAnnotation structural_annotation(const std::string& record_id,
                                            const ReasoningTrace& trace) {
  StepAnnotation a;
  a.record_id = record_id;
  for (int s = 1; s <= kStepCount; ++s) {
    if (!trace.has_section(s) || trim(trace.section_body(s)).empty()) a.step_flags.insert(s);
  }
  if (!a.step_flags.empty()) a.first_error_step = *a.step_flags.begin();
  return a;
}

// Second-round correction: hands the corrector the original question and the
// failed generation, then re-scores the corrected output.
inline EvalOutcome self_correct(const TaskRecord& record, const EvalOutcome& failed,
                                const ModelEndpoint& corrector, Gateway& gateway,
                                const PromptLibrary& prompts, const EvalOptions& options,
                                JudgeContext* judge = nullptr) {
  if (failed.correct) {
    throw std::invalid_argument(failed.record_id + ": self-correction of a correct outcome");
  }
  std::string prompt =
      prompts.render_correction(record.question_text(), failed.raw_completion.empty()
                                                            ? std::string("(no previous answer)")
                                                            : failed.raw_completion);
  ChatExchange exchange = gateway.complete(corrector, prompt);
  EvalOutcome corrected =
      evaluate_completion(record, failed.strategy_id, exchange.response, options, judge);
  return corrected;
}

}  // namespace quasar
