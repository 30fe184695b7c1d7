#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/io.hpp"
#include "quasar/strategy.hpp"
#include "quasar/text.hpp"

namespace quasar {

struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A prompt template stored as plain text. Sections are introduced by lines
// starting with '#'; inside a "#Steps" section, lines starting with "N)"
// open numbered instruction blocks. Placeholders like {question} are
// substituted literally in a single pass, never re-expanded.
class PromptTemplate {
 public:
  struct Section {
    std::string name;    // header text without '#' and trailing ':'
    size_t header_begin = 0;
    size_t body_begin = 0;
    size_t end = 0;      // one past the section's last byte
  };

  struct StepBlock {
    int index = 0;
    size_t begin = 0;    // offset of the "N)" line
    size_t end = 0;      // one past the block, separator included
  };

  static PromptTemplate from_string(std::string raw) {
    PromptTemplate t;
    t.raw_ = std::move(raw);
    t.parse();
    return t;
  }

  static PromptTemplate load(const std::filesystem::path& path) {
    return from_string(read_text_file(path));
  }

  const std::string& raw() const { return raw_; }
  const std::vector<Section>& sections() const { return sections_; }
  const std::vector<StepBlock>& steps() const { return steps_; }
  bool has_steps() const { return !steps_.empty(); }

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  std::string section_body(const Section& s) const {
    return trim(std::string_view(raw_).substr(s.body_begin, s.end - s.body_begin));
  }

  std::string step_text(int index) const {
    for (const auto& b : steps_) {
      if (b.index == index) {
        return trim(std::string_view(raw_).substr(b.begin, b.end - b.begin));
      }
    }
    throw TemplateError("template has no step " + std::to_string(index));
  }

  // Template text with step blocks omitted and/or reordered. Omission deletes
  // the block bytes outright; labels and cross-references in surviving blocks
  // stay untouched. With all steps retained in canonical order this returns
  // the raw template byte for byte.
  std::string with_steps(const std::vector<int>& order) const {
    if (steps_.empty()) throw TemplateError("template has no step section");
    std::string out;
    out.reserve(raw_.size());
    out.append(raw_, 0, steps_.front().begin);
    for (int wanted : order) {
      bool found = false;
      for (const auto& b : steps_) {
        if (b.index == wanted) {
          out.append(raw_, b.begin, b.end - b.begin);
          found = true;
          break;
        }
      }
      if (!found) throw TemplateError("template has no step " + std::to_string(wanted));
    }
    out.append(raw_, steps_.back().end, raw_.size() - steps_.back().end);
    return out;
  }

 private:
  void parse() {
    auto lines = split_lines(raw_);
    size_t offset = 0;
    for (auto line : lines) {
      size_t line_begin = offset;
      offset += line.size() + 1;  // '\n'; harmless overshoot on the last line
      if (!line.empty() && line.front() == '#') {
        std::string name = trim(line.substr(1));
        if (!name.empty() && name.back() == ':') name.pop_back();
        Section s;
        s.name = name;
        s.header_begin = line_begin;
        s.body_begin = std::min(line_begin + line.size() + 1, raw_.size());
        sections_.push_back(s);
      }
    }
    for (size_t i = 0; i < sections_.size(); ++i) {
      sections_[i].end = i + 1 < sections_.size() ? sections_[i + 1].header_begin : raw_.size();
    }
    const Section* steps_section = find_section("Steps");
    if (steps_section) parse_steps(*steps_section);
  }

  void parse_steps(const Section& section) {
    size_t offset = section.body_begin;
    std::string_view body(raw_.data() + section.body_begin, section.end - section.body_begin);
    for (auto line : split_lines(body)) {
      size_t line_begin = offset;
      offset += line.size() + 1;
      if (line.size() >= 2 && line[0] >= '1' && line[0] <= '9' && line[1] == ')') {
        StepBlock b;
        b.index = line[0] - '0';
        b.begin = line_begin;
        steps_.push_back(b);
      }
    }
    for (size_t i = 0; i < steps_.size(); ++i) {
      steps_[i].end = i + 1 < steps_.size() ? steps_[i + 1].begin : section.end;
      if (i > 0 && steps_[i].index <= steps_[i - 1].index) {
        throw TemplateError("step blocks out of order in template");
      }
    }
  }

  std::string raw_;
  std::vector<Section> sections_;
  std::vector<StepBlock> steps_;
};

// Literal single-pass placeholder substitution.
inline std::string fill_placeholder(std::string_view text, std::string_view name,
                                    std::string_view value) {
  std::string token = "{" + std::string(name) + "}";
  if (text.find(token) == std::string_view::npos) {
    throw TemplateError("template is missing placeholder " + token);
  }
  return replace_all(text, token, value);
}

struct RenderedPrompt {
  std::string strategy_id;
  std::string full_text;
  std::string role_text;
  std::string task_text;
  std::vector<std::string> steps_text;  // presentation order
  std::string question_text;
};

// Loads the prompt templates from a directory and renders them for a given
// strategy. Files: quasar.txt, baseline.txt, cot.txt, judge.txt,
// correction.txt. Any of them can be overridden by pointing the library at a
// different directory.
class PromptLibrary {
 public:
  explicit PromptLibrary(const std::filesystem::path& dir)
      : quasar_(PromptTemplate::load(dir / "quasar.txt")),
        baseline_(PromptTemplate::load(dir / "baseline.txt")),
        cot_(PromptTemplate::load(dir / "cot.txt")),
        judge_(PromptTemplate::load(dir / "judge.txt")),
        correction_(PromptTemplate::load(dir / "correction.txt")) {
    if (!quasar_.has_steps() || quasar_.steps().size() != kStepCount) {
      throw TemplateError("structured template must define steps 1..4");
    }
  }

  const PromptTemplate& structured_template() const { return quasar_; }

  RenderedPrompt render(const StrategyVariant& variant, const std::string& question) const {
    variant.validate();
    if (trim(question).empty()) throw std::invalid_argument("question must not be empty");
    const PromptTemplate* tmpl = nullptr;
    std::string body;
    switch (variant.kind) {
      case StrategyKind::kBaseline:
        tmpl = &baseline_;
        body = baseline_.raw();
        break;
      case StrategyKind::kCot:
        tmpl = &cot_;
        body = cot_.raw();
        break;
      case StrategyKind::kQuasar:
        tmpl = &quasar_;
        body = quasar_.with_steps(variant.step_order);
        break;
    }
    RenderedPrompt out;
    out.strategy_id = variant.id();
    out.full_text = fill_placeholder(body, "question", question);
    out.question_text = question;
    if (const auto* role = tmpl->find_section("Role")) out.role_text = tmpl->section_body(*role);
    if (const auto* task = tmpl->find_section("Task")) out.task_text = tmpl->section_body(*task);
    if (variant.kind == StrategyKind::kQuasar) {
      for (int s : variant.step_order) out.steps_text.push_back(tmpl->step_text(s));
    }
    return out;
  }

  std::string render_judge(const std::string& model_result,
                           const std::string& correct_answer) const {
    if (trim(model_result).empty()) throw std::invalid_argument("model result must not be empty");
    if (trim(correct_answer).empty()) {
      throw std::invalid_argument("target answer must not be empty");
    }
    std::string text = fill_placeholder(judge_.raw(), "model_result", model_result);
    return fill_placeholder(text, "correct_answer", correct_answer);
  }

  std::string render_correction(const std::string& question,
                                const std::string& previous_answer) const {
    if (trim(question).empty()) throw std::invalid_argument("question must not be empty");
    if (trim(previous_answer).empty()) {
      throw std::invalid_argument("previous answer must not be empty");
    }
    std::string text = fill_placeholder(correction_.raw(), "question", question);
    return fill_placeholder(text, "previous_answer", previous_answer);
  }

 private:
  PromptTemplate quasar_;
  PromptTemplate baseline_;
  PromptTemplate cot_;
  PromptTemplate judge_;
  PromptTemplate correction_;
};

}  // namespace quasar
