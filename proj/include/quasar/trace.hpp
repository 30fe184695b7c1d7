#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quasar/answer.hpp"
#include "quasar/strategy.hpp"
#include "quasar/text.hpp"

namespace quasar {

struct SymbolEntry {
  std::string name;
  std::string value_text;              // raw text after the last '='
  std::optional<Decimal> value;        // numeric reading of value_text, when it has one
  std::string description;
  int arity = -1;                      // predicates only
};

struct SymbolTable {
  std::vector<SymbolEntry> predicates;
  std::vector<SymbolEntry> variables;
  std::vector<SymbolEntry> constants;

  bool empty() const { return predicates.empty() && variables.empty() && constants.empty(); }

  const SymbolEntry* find_variable(std::string_view name) const {
    for (const auto& v : variables) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
};

struct TraceSection {
  int step = 0;
  size_t begin = 0;       // start of the marker line
  size_t body_begin = 0;  // first byte after the marker line
  size_t end = 0;         // start of the next section (or end of text)
};

// Structured view of a model completion. Parsing is total: any input yields
// a trace, and absent or malformed structure shows up as missing sections
// and warnings rather than errors.
struct ReasoningTrace {
  std::string raw;
  std::vector<TraceSection> sections;   // document order, at most one per step
  size_t preamble_end = 0;              // bytes before the first marker
  bool ordered_correctly = false;       // present sections appear in step order
  std::optional<FinalAnswer> final_answer;
  std::vector<std::string> explanation_steps;
  SymbolTable symbols;
  std::vector<std::string> warnings;

  const TraceSection* section(int step) const {
    for (const auto& s : sections) {
      if (s.step == step) return &s;
    }
    return nullptr;
  }

  bool has_section(int step) const { return section(step) != nullptr; }
  bool complete() const { return sections.size() == kStepCount; }

  // Whole section, marker line included, trailing whitespace trimmed.
  std::string section_text(int step) const {
    const TraceSection* s = section(step);
    if (!s) return {};
    std::string_view span = std::string_view(raw).substr(s->begin, s->end - s->begin);
    while (!span.empty() && is_space(span.back())) span.remove_suffix(1);
    return std::string(span);
  }

  std::string section_body(int step) const {
    const TraceSection* s = section(step);
    if (!s) return {};
    return trim(std::string_view(raw).substr(s->body_begin, s->end - s->body_begin));
  }
};

namespace detail {

// Matches a whole line against a step marker, tolerating "#" prefixes,
// "**" emphasis, and the token written as s1, s_1 or ($s_1$). Returns the
// step index or nullopt.
inline std::optional<int> match_marker_line(std::string_view line) {
  std::string_view s = trim_view(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '*')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '*' || s.back() == ':' || s.back() == '.')) s.remove_suffix(1);
  s = trim_view(s);
  static constexpr struct {
    std::string_view name;
    int step;
  } kNames[] = {
      {"abstraction", 1}, {"formalisation", 2}, {"formalization", 2},
      {"explanation", 3}, {"explaination", 3},  {"answering", 4},
  };
  for (const auto& entry : kNames) {
    if (!starts_with_ci(s, entry.name)) continue;
    std::string_view rest = trim_view(s.substr(entry.name.size()));
    if (rest.empty()) return std::nullopt;  // bare word, not a marker
    bool open_paren = false;
    if (rest.front() == '(') {
      open_paren = true;
      rest.remove_prefix(1);
    }
    if (!rest.empty() && rest.front() == '$') rest.remove_prefix(1);
    if (rest.empty() || (rest.front() != 's' && rest.front() != 'S')) return std::nullopt;
    rest.remove_prefix(1);
    if (!rest.empty() && rest.front() == '_') rest.remove_prefix(1);
    if (rest.empty() || rest.front() < '1' || rest.front() > '9') return std::nullopt;
    int digit = rest.front() - '0';
    rest.remove_prefix(1);
    if (!rest.empty() && rest.front() == '$') rest.remove_prefix(1);
    if (open_paren) {
      if (rest.empty() || rest.front() != ')') return std::nullopt;
      rest.remove_prefix(1);
    }
    if (!trim_view(rest).empty()) return std::nullopt;
    if (digit != entry.step) return std::nullopt;  // e.g. "Abstraction (s_2)"
    return entry.step;
  }
  return std::nullopt;
}

inline bool is_step_heading(std::string_view line, std::string* rest) {
  std::string_view s = trim_view(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '-')) {
    s.remove_prefix(1);
  }
  s = trim_view(s);
  if (!starts_with_ci(s, "step")) return false;
  s.remove_prefix(4);
  s = trim_view(s);
  size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  if (digits == 0) return false;
  s.remove_prefix(digits);
  if (!s.empty() && (s.front() == ':' || s.front() == '.')) s.remove_prefix(1);
  *rest = trim(s);
  return true;
}

inline bool is_symbol_group_heading(std::string_view line, int* group) {
  std::string_view s = trim_view(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '*')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '*' || s.back() == ':')) s.remove_suffix(1);
  s = trim_view(s);
  if (starts_with_ci(s, "predicate")) *group = 0;
  else if (starts_with_ci(s, "variable")) *group = 1;
  else if (starts_with_ci(s, "constant")) *group = 2;
  else return false;
  return true;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!((s[0] >= 'a' && s[0] <= 'z') || (s[0] >= 'A' && s[0] <= 'Z') || s[0] == '_')) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

// Leading numeric token of a value string: "18", "2/15", "-3.5".
inline std::optional<Decimal> leading_number(std::string_view text) {
  std::string_view s = trim_view(text);
  size_t len = 0;
  while (len < s.size() &&
         ((s[len] >= '0' && s[len] <= '9') || s[len] == '.' || s[len] == '/' ||
          (len == 0 && (s[len] == '-' || s[len] == '+')))) {
    ++len;
  }
  if (len == 0) return std::nullopt;
  try {
    return Decimal::parse(s.substr(0, len));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// Parses the bullet list in an abstraction section into named symbols.
// Best effort: prose bullets without a clean "name = value:" or
// "name(args):" shape are skipped; duplicate names keep the first entry and
// add a warning.
inline SymbolTable parse_symbols(std::string_view abstraction_body,
                                 std::vector<std::string>* warnings = nullptr) {
  SymbolTable table;
  int group = -1;
  auto warn = [&](const std::string& message) {
    if (warnings) warnings->push_back(message);
  };
  auto add = [&](std::vector<SymbolEntry>& list, SymbolEntry entry) {
    for (const auto& existing : list) {
      if (existing.name == entry.name) {
        warn("duplicate symbol dropped: " + entry.name);
        return;
      }
    }
    list.push_back(std::move(entry));
  };
  for (auto line : split_lines(abstraction_body)) {
    int next_group = -1;
    if (detail::is_symbol_group_heading(line, &next_group)) {
      group = next_group;
      continue;
    }
    std::string_view s = trim_view(line);
    if (s.empty() || group < 0) continue;
    if (s.front() != '-' && s.front() != '*') continue;
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || is_space(s.front()))) {
      s.remove_prefix(1);
    }
    if (s.empty()) continue;
    if (group == 0) {
      size_t paren = s.find('(');
      size_t close = s.find(')', paren == std::string_view::npos ? 0 : paren);
      if (paren == std::string_view::npos || close == std::string_view::npos) continue;
      SymbolEntry entry;
      entry.name = trim(s.substr(0, paren));
      if (!detail::is_identifier(entry.name)) continue;
      std::string_view args = s.substr(paren + 1, close - paren - 1);
      entry.arity = trim_view(args).empty()
                        ? 0
                        : 1 + static_cast<int>(std::count(args.begin(), args.end(), ','));
      size_t colon = s.find(':', close);
      if (colon != std::string_view::npos) entry.description = trim(s.substr(colon + 1));
      add(table.predicates, std::move(entry));
      continue;
    }
    auto& list = group == 1 ? table.variables : table.constants;
    size_t eq = s.find('=');
    SymbolEntry entry;
    if (eq != std::string_view::npos) {
      entry.name = trim(s.substr(0, eq));
      if (!detail::is_identifier(entry.name)) continue;
      size_t last_eq = s.rfind('=');
      std::string_view value = s.substr(last_eq + 1);
      size_t colon = value.find(':');
      if (colon != std::string_view::npos) {
        entry.description = trim(value.substr(colon + 1));
        value = value.substr(0, colon);
      }
      entry.value_text = trim(value);
      entry.value = detail::leading_number(entry.value_text);
    } else {
      size_t colon = s.find(':');
      if (colon == std::string_view::npos) continue;
      entry.name = trim(s.substr(0, colon));
      if (!detail::is_identifier(entry.name)) continue;
      entry.description = trim(s.substr(colon + 1));
    }
    add(list, std::move(entry));
  }
  return table;
}

// Total parser: segments a completion into protocol sections, splits the
// explanation into numbered reasoning steps, reads the symbol table and the
// final answer. Never throws on model output.
inline ReasoningTrace parse_trace(std::string raw) {
  ReasoningTrace trace;
  trace.raw = std::move(raw);
  const std::string& text = trace.raw;

  std::array<bool, kStepCount + 1> seen{};
  size_t offset = 0;
  for (auto line : split_lines(text)) {
    size_t line_begin = offset;
    offset += line.size() + 1;
    auto step = detail::match_marker_line(line);
    if (!step) continue;
    if (seen[*step]) {
      trace.warnings.push_back("duplicate marker for step " + std::to_string(*step));
      continue;
    }
    seen[*step] = true;
    TraceSection section;
    section.step = *step;
    section.begin = line_begin;
    section.body_begin = std::min(line_begin + line.size() + 1, text.size());
    trace.sections.push_back(section);
  }
  for (size_t i = 0; i < trace.sections.size(); ++i) {
    trace.sections[i].end =
        i + 1 < trace.sections.size() ? trace.sections[i + 1].begin : text.size();
  }
  trace.preamble_end = trace.sections.empty() ? text.size() : trace.sections.front().begin;
  trace.ordered_correctly = true;
  for (size_t i = 1; i < trace.sections.size(); ++i) {
    if (trace.sections[i].step < trace.sections[i - 1].step) trace.ordered_correctly = false;
  }
  if (!trace.sections.empty() && !trace.ordered_correctly) {
    trace.warnings.push_back("sections out of order");
  }

  if (trace.has_section(1)) {
    trace.symbols = parse_symbols(trace.section_body(1), &trace.warnings);
  }

  if (trace.has_section(3)) {
    std::string body = trace.section_body(3);
    std::vector<std::string> chunks;
    std::string current;
    bool any_heading = false;
    for (auto line : split_lines(body)) {
      std::string rest;
      if (detail::is_step_heading(line, &rest)) {
        any_heading = true;
        if (!trim(current).empty()) chunks.push_back(trim(current));
        current = std::string(trim_view(line));
        current += '\n';
        continue;
      }
      current += std::string(line);
      current += '\n';
    }
    if (!trim(current).empty()) chunks.push_back(trim(current));
    if (!any_heading) {
      if (!trim(body).empty()) trace.explanation_steps.push_back(trim(body));
    } else {
      // Text before the first "Step 1:" heading is preamble, not a step.
      for (auto& chunk : chunks) {
        std::string rest;
        if (detail::is_step_heading(split_lines(chunk).front(), &rest)) {
          trace.explanation_steps.push_back(chunk);
        }
      }
    }
  }

  trace.final_answer = infer_final_answer(text);
  return trace;
}

}  // namespace quasar
