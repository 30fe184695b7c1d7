#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/answer.hpp"

namespace quasar {

struct RecordError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Choice {
  char label = 0;
  std::string text;
};

// One benchmark item. For multiple-choice tasks the option list is kept
// structured so perturbations can reletter it; the prompt-facing question
// text is composed on demand.
struct TaskRecord {
  std::string id;
  std::string task;
  AnswerKind kind = AnswerKind::kFreeText;
  std::string stem;
  std::optional<std::string> passage;
  std::vector<Choice> choices;
  FinalAnswer gold;

  std::string question_text() const {
    std::string out;
    if (passage && !passage->empty()) {
      out += *passage;
      out += "\n\n";
    }
    out += stem;
    if (!choices.empty()) {
      out += "\nAnswer Choices:";
      for (const auto& c : choices) {
        out += "\n(";
        out += c.label;
        out += ") ";
        out += c.text;
      }
    }
    return out;
  }

  const Choice* gold_choice() const {
    if (kind != AnswerKind::kChoice) return nullptr;
    for (const auto& c : choices) {
      if (c.label == gold.choice_label) return &c;
    }
    return nullptr;
  }

  // Target string handed to the judge; for option questions the label alone
  // would be meaningless to compare against, so the option text rides along.
  std::string judge_target_text() const {
    if (kind == AnswerKind::kChoice) {
      const Choice* c = gold_choice();
      std::string out(1, gold.choice_label);
      if (c && !c->text.empty()) {
        out += ") ";
        out += c->text;
      }
      return out;
    }
    return gold.display();
  }

  void validate() const {
    if (id.empty()) throw RecordError("record has no id");
    if (trim(stem).empty()) throw RecordError(id + ": empty question");
    if (task.empty()) throw RecordError(id + ": empty task name");
    if ((kind == AnswerKind::kChoice) != !choices.empty()) {
      throw RecordError(id + ": choice list does not match answer kind");
    }
    if (gold.kind != kind) throw RecordError(id + ": gold answer kind mismatch");
    if (kind == AnswerKind::kChoice) {
      if (choices.size() > 26) throw RecordError(id + ": too many choices");
      for (size_t i = 0; i < choices.size(); ++i) {
        if (choices[i].label != static_cast<char>('A' + i)) {
          throw RecordError(id + ": choice labels must run A, B, C, ...");
        }
      }
      if (!gold_choice()) throw RecordError(id + ": gold label not among choices");
    }
  }
};

// Canonical task names, tolerant of common spellings.
inline std::string canonical_task_name(std::string_view name) {
  std::string lower = to_lower(trim_view(name));
  if (lower == "aqua" || lower == "aqua-rat" || lower == "aqua_rat") return "AQuA";
  if (lower == "gsm8k") return "GSM8K";
  if (lower == "svamp") return "SVAMP";
  if (lower == "mmlu-redux" || lower == "mmlu_redux" || lower == "mmluredux") return "MMLU-Redux";
  if (lower == "olybench" || lower == "olympiadbench") return "OlyBench";
  if (lower == "gpqa") return "GPQA";
  if (lower == "drop") return "DROP";
  return std::string(trim_view(name));
}

}  // namespace quasar
