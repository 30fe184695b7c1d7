#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quasar/decimal.hpp"
#include "quasar/text.hpp"

namespace quasar {

enum class AnswerKind { kNumeric, kChoice, kFreeText };

inline const char* answer_kind_name(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::kNumeric: return "numeric";
    case AnswerKind::kChoice: return "choice";
    case AnswerKind::kFreeText: return "freetext";
  }
  return "unknown";
}

inline AnswerKind parse_answer_kind(std::string_view name) {
  if (name == "numeric") return AnswerKind::kNumeric;
  if (name == "choice") return AnswerKind::kChoice;
  if (name == "freetext") return AnswerKind::kFreeText;
  throw std::invalid_argument("unknown answer kind: " + std::string(name));
}

struct FinalAnswer {
  AnswerKind kind = AnswerKind::kFreeText;
  Decimal numeric_value;
  char choice_label = 0;
  std::string text_value;

  static FinalAnswer numeric(Decimal value) {
    FinalAnswer a;
    a.kind = AnswerKind::kNumeric;
    a.numeric_value = value;
    return a;
  }

  static FinalAnswer choice(char label) {
    if (label < 'A' || label > 'E') throw std::invalid_argument("choice label out of range");
    FinalAnswer a;
    a.kind = AnswerKind::kChoice;
    a.choice_label = label;
    return a;
  }

  static FinalAnswer free_text(std::string text) {
    FinalAnswer a;
    a.kind = AnswerKind::kFreeText;
    a.text_value = std::move(text);
    return a;
  }

  std::string display() const {
    switch (kind) {
      case AnswerKind::kNumeric: return numeric_value.to_string();
      case AnswerKind::kChoice: return std::string(1, choice_label);
      case AnswerKind::kFreeText: return text_value;
    }
    return {};
  }
};

namespace detail {

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Numeric token at position `i`: optional sign, digits with optional
// thousands separators, optional fraction digits. Returns one past the token
// and writes the cleaned digits, or returns npos when `i` does not start a
// well-formed standalone number.
inline size_t scan_number(std::string_view s, size_t i, std::string* cleaned) {
  size_t start = i;
  std::string out;
  if (s[i] == '-') {
    out.push_back('-');
    ++i;
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return std::string_view::npos;
  }
  if (s[i] < '0' || s[i] > '9') return std::string_view::npos;
  if (start > 0 && is_ident_char(s[start - 1])) return std::string_view::npos;
  while (i < s.size()) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      out.push_back(c);
      ++i;
      continue;
    }
    if (c == ',' && i + 3 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9' &&
        s[i + 2] >= '0' && s[i + 2] <= '9' && s[i + 3] >= '0' && s[i + 3] <= '9' &&
        (i + 4 >= s.size() || s[i + 4] < '0' || s[i + 4] > '9')) {
      out += {s[i + 1], s[i + 2], s[i + 3]};
      i += 4;
      continue;
    }
    break;
  }
  if (i < s.size() && s[i] == '.' && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9') {
    out.push_back('.');
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      out.push_back(s[i]);
      ++i;
    }
  }
  // A number fused to a following word ("1st", "4o") is not an answer token.
  if (i < s.size() && (is_ident_char(s[i]))) return std::string_view::npos;
  *cleaned = out;
  return i;
}

}  // namespace detail

inline std::optional<Decimal> first_number_in(std::string_view text) {
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool sign = c == '-' && i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9' &&
                (i == 0 || !detail::is_ident_char(text[i - 1]));
    if ((c >= '0' && c <= '9') || sign) {
      std::string cleaned;
      size_t end = detail::scan_number(text, i, &cleaned);
      if (end != std::string_view::npos) return Decimal::parse(cleaned);
    }
  }
  return std::nullopt;
}

inline std::optional<Decimal> last_number_in(std::string_view text) {
  std::optional<Decimal> found;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool sign = c == '-' && i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9' &&
                (i == 0 || !detail::is_ident_char(text[i - 1]));
    if ((c >= '0' && c <= '9') || sign) {
      std::string cleaned;
      size_t end = detail::scan_number(text, i, &cleaned);
      if (end != std::string_view::npos) {
        found = Decimal::parse(cleaned);
        i = end - 1;
      }
    }
  }
  return found;
}

// First standalone option letter in a marker payload. Lenient: either case,
// any non-identifier neighbours ("(b)", "B.", "B" at end of line).
inline std::optional<char> payload_choice_letter(std::string_view payload) {
  for (size_t i = 0; i < payload.size(); ++i) {
    char c = payload[i];
    char upper = (c >= 'a' && c <= 'e') ? static_cast<char>(c - 'a' + 'A') : c;
    if (upper < 'A' || upper > 'E') continue;
    bool left_ok = i == 0 || !detail::is_ident_char(payload[i - 1]);
    bool right_ok = i + 1 >= payload.size() || !detail::is_ident_char(payload[i + 1]);
    if (left_ok && right_ok) return upper;
  }
  return std::nullopt;
}

// Last standalone option letter in a whole completion. Strict: uppercase
// only, and the letter must be closed off by punctuation or a line end,
// otherwise ordinary words ("A fog bank...") would match.
inline std::optional<char> fallback_choice_letter(std::string_view text) {
  std::optional<char> found;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c < 'A' || c > 'E') continue;
    bool left_ok = i == 0 || !detail::is_ident_char(text[i - 1]);
    if (!left_ok) continue;
    char next = i + 1 < text.size() ? text[i + 1] : '\n';
    if (next == ')' || next == '.' || next == ',' || next == ':' || next == ';' ||
        next == '!' || next == '?' || next == '"' || next == '\'' || next == '\n' ||
        next == '\r') {
      found = c;
    }
  }
  return found;
}

inline std::string normalize_free_text(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    if (c == '*' || c == '_' || c == '"') continue;
    cleaned.push_back(c);
  }
  std::string out = collapse_spaces(trim_view(cleaned));
  while (!out.empty() && (out.back() == '.' || out.back() == ':')) out.pop_back();
  return trim(out);
}

inline constexpr std::string_view kAnswerMarker = "the answer is";

// Payload of the last "The answer is" marker: the rest of that line with
// leading punctuation/markup skipped. Empty payloads count as missing.
inline std::optional<std::string> answer_marker_payload(std::string_view raw) {
  size_t pos = rfind_ci(raw, kAnswerMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  size_t begin = pos + kAnswerMarker.size();
  size_t end = raw.find('\n', begin);
  if (end == std::string_view::npos) end = raw.size();
  std::string_view payload = raw.substr(begin, end - begin);
  while (!payload.empty() &&
         (payload.front() == ':' || payload.front() == '*' || is_space(payload.front()))) {
    payload.remove_prefix(1);
  }
  if (trim_view(payload).empty()) return std::nullopt;
  return std::string(payload);
}

// Extracts the final answer from a completion: the explicit answer marker
// wins; without one (or with an unusable payload) falls back to the last
// number, the last standalone option letter, or the last non-blank line,
// depending on the kind the task expects.
inline std::optional<FinalAnswer> extract_final_answer(std::string_view raw,
                                                       AnswerKind expected) {
  if (auto payload = answer_marker_payload(raw)) {
    switch (expected) {
      case AnswerKind::kNumeric:
        if (auto num = first_number_in(*payload)) return FinalAnswer::numeric(*num);
        break;
      case AnswerKind::kChoice:
        if (auto letter = payload_choice_letter(*payload)) return FinalAnswer::choice(*letter);
        break;
      case AnswerKind::kFreeText: {
        std::string text = normalize_free_text(*payload);
        if (!text.empty()) return FinalAnswer::free_text(text);
        break;
      }
    }
  }
  switch (expected) {
    case AnswerKind::kNumeric:
      if (auto num = last_number_in(raw)) return FinalAnswer::numeric(*num);
      return std::nullopt;
    case AnswerKind::kChoice:
      if (auto letter = fallback_choice_letter(raw)) return FinalAnswer::choice(*letter);
      return std::nullopt;
    case AnswerKind::kFreeText: {
      auto lines = split_lines(raw);
      for (size_t i = lines.size(); i-- > 0;) {
        std::string text = normalize_free_text(lines[i]);
        if (!text.empty()) return FinalAnswer::free_text(text);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Best-effort answer with the kind inferred from the completion itself; used
// when a trace is parsed without knowing the task. Without a marker only a
// trailing number is trusted.
inline std::optional<FinalAnswer> infer_final_answer(std::string_view raw) {
  if (auto payload = answer_marker_payload(raw)) {
    if (auto num = first_number_in(*payload)) return FinalAnswer::numeric(*num);
    if (auto letter = payload_choice_letter(*payload)) return FinalAnswer::choice(*letter);
    std::string text = normalize_free_text(*payload);
    if (!text.empty()) return FinalAnswer::free_text(text);
    return std::nullopt;
  }
  if (auto num = last_number_in(raw)) return FinalAnswer::numeric(*num);
  return std::nullopt;
}

}  // namespace quasar
