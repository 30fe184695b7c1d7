#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "quasar/jsonl.hpp"
#include "quasar/record.hpp"

namespace quasar {

struct LoadResult {
  std::vector<TaskRecord> records;
  std::vector<JsonlReject> rejects;
};

namespace detail {

inline std::string require_string(const Json& row, const char* key) {
  if (!row.contains(key)) throw RecordError(std::string("missing field: ") + key);
  const Json& v = row.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw RecordError(std::string("field is not a string: ") + key);
}

// Exact numeric reading of a JSON value: numbers go through their shortest
// textual form so 0.1 stays 0.1 instead of picking up binary noise.
inline Decimal decimal_from_json(const Json& v) {
  if (v.is_string()) return Decimal::parse(v.get<std::string>());
  if (v.is_number()) return Decimal::parse(v.dump());
  throw RecordError("value is not numeric: " + v.dump());
}

inline void set_choices(TaskRecord& record, const std::vector<std::string>& texts) {
  record.choices.clear();
  for (size_t i = 0; i < texts.size(); ++i) {
    record.choices.push_back({static_cast<char>('A' + i), trim(texts[i])});
  }
}

// "A)3 km" or "B) 5 km" -> text with the embedded label stripped.
inline std::string strip_option_label(const std::string& text, char expected) {
  std::string_view s = trim_view(text);
  if (s.size() >= 2 && (s[0] == expected || s[0] == expected + 32) &&
      (s[1] == ')' || s[1] == '.' || s[1] == ':')) {
    return trim(s.substr(2));
  }
  return std::string(s);
}

inline char choice_label_from_json(const Json& v, size_t option_count) {
  if (v.is_number_integer()) {
    auto index = v.get<long long>();
    if (index < 0 || index >= static_cast<long long>(option_count)) {
      throw RecordError("answer index out of range: " + v.dump());
    }
    return static_cast<char>('A' + index);
  }
  if (v.is_string()) {
    std::string s = trim(v.get<std::string>());
    if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'z') s[0] -= 32;
    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z') return s[0];
    throw RecordError("bad answer label: " + v.dump());
  }
  throw RecordError("bad answer label: " + v.dump());
}

}  // namespace detail

using RecordMapper = std::function<TaskRecord(const Json&, size_t line_number)>;

// Maps raw dataset rows onto TaskRecord. Each named schema corresponds to
// the upstream file layout of one benchmark; "plain" is this tool's own
// self-describing layout, which fixtures and exports use.
inline const std::map<std::string, RecordMapper>& schema_registry() {
  static const std::map<std::string, RecordMapper> registry = {
      {"plain",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = canonical_task_name(detail::require_string(row, "task"));
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : to_lower(r.task) + "-" + std::to_string(line);
         r.kind = parse_answer_kind(detail::require_string(row, "kind"));
         r.stem = detail::require_string(row, "question");
         if (row.contains("passage")) r.passage = detail::require_string(row, "passage");
         if (row.contains("choices")) {
           std::vector<std::string> texts;
           for (const auto& c : row.at("choices")) {
             texts.push_back(c.is_string() ? c.get<std::string>()
                                           : detail::require_string(c, "text"));
           }
           detail::set_choices(r, texts);
         }
         const Json& gold = row.at("gold");
         switch (r.kind) {
           case AnswerKind::kNumeric:
             r.gold = FinalAnswer::numeric(detail::decimal_from_json(gold));
             break;
           case AnswerKind::kChoice:
             r.gold = FinalAnswer::choice(detail::choice_label_from_json(gold, r.choices.size()));
             break;
           case AnswerKind::kFreeText:
             r.gold = FinalAnswer::free_text(detail::require_string(row, "gold"));
             break;
         }
         return r;
       }},
      {"gsm8k",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "GSM8K";
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : "gsm8k-" + std::to_string(line);
         r.kind = AnswerKind::kNumeric;
         r.stem = detail::require_string(row, "question");
         std::string solution = detail::require_string(row, "answer");
         size_t hash = solution.rfind("####");
         if (hash == std::string::npos) throw RecordError("no #### answer line");
         std::string tail = trim(solution.substr(hash + 4));
         auto value = first_number_in(tail);
         if (!value) throw RecordError("no number after ####");
         r.gold = FinalAnswer::numeric(*value);
         return r;
       }},
      {"aqua",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "AQuA";
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : "aqua-" + std::to_string(line);
         r.kind = AnswerKind::kChoice;
         r.stem = detail::require_string(row, "question");
         std::vector<std::string> texts;
         const Json& options = row.at("options");
         for (size_t i = 0; i < options.size(); ++i) {
           texts.push_back(detail::strip_option_label(options.at(i).get<std::string>(),
                                                      static_cast<char>('A' + i)));
         }
         detail::set_choices(r, texts);
         r.gold = FinalAnswer::choice(
             detail::choice_label_from_json(row.at("correct"), r.choices.size()));
         return r;
       }},
      {"svamp",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "SVAMP";
         r.id = row.contains("ID") ? detail::require_string(row, "ID")
                                   : "svamp-" + std::to_string(line);
         r.kind = AnswerKind::kNumeric;
         r.stem = trim(detail::require_string(row, "Body")) + " " +
                  trim(detail::require_string(row, "Question"));
         r.gold = FinalAnswer::numeric(detail::decimal_from_json(row.at("Answer")));
         return r;
       }},
      {"mmlu-redux",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "MMLU-Redux";
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : "mmlu-redux-" + std::to_string(line);
         r.kind = AnswerKind::kChoice;
         r.stem = detail::require_string(row, "question");
         std::vector<std::string> texts;
         for (const auto& c : row.at("choices")) texts.push_back(c.get<std::string>());
         detail::set_choices(r, texts);
         r.gold = FinalAnswer::choice(
             detail::choice_label_from_json(row.at("answer"), r.choices.size()));
         return r;
       }},
      {"olybench",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "OlyBench";
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : "olybench-" + std::to_string(line);
         r.stem = detail::require_string(row, "question");
         const Json& answer = row.at("final_answer");
         const Json& value = answer.is_array() && !answer.empty() ? answer.at(0) : answer;
         try {
           r.gold = FinalAnswer::numeric(detail::decimal_from_json(value));
           r.kind = AnswerKind::kNumeric;
         } catch (const std::exception&) {
           r.gold = FinalAnswer::free_text(trim(value.get<std::string>()));
           r.kind = AnswerKind::kFreeText;
         }
         return r;
       }},
      {"gpqa",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "GPQA";
         r.id = row.contains("id") ? detail::require_string(row, "id")
                                   : "gpqa-" + std::to_string(line);
         r.kind = AnswerKind::kChoice;
         r.stem = detail::require_string(row, "question");
         std::vector<std::string> texts;
         for (const auto& c : row.at("choices")) texts.push_back(c.get<std::string>());
         detail::set_choices(r, texts);
         r.gold = FinalAnswer::choice(
             detail::choice_label_from_json(row.at("answer"), r.choices.size()));
         return r;
       }},
      {"drop",
       [](const Json& row, size_t line) {
         TaskRecord r;
         r.task = "DROP";
         r.id = row.contains("query_id") ? detail::require_string(row, "query_id")
                                         : "drop-" + std::to_string(line);
         r.passage = detail::require_string(row, "passage");
         r.stem = detail::require_string(row, "question");
         std::string answer = trim(detail::require_string(row, "answer"));
         try {
           r.gold = FinalAnswer::numeric(Decimal::parse(answer));
           r.kind = AnswerKind::kNumeric;
         } catch (const std::exception&) {
           r.gold = FinalAnswer::free_text(answer);
           r.kind = AnswerKind::kFreeText;
         }
         return r;
       }},
  };
  return registry;
}

inline std::vector<std::string> known_schemas() {
  std::vector<std::string> names;
  for (const auto& [name, mapper] : schema_registry()) names.push_back(name);
  return names;
}

// Loads and validates a dataset file. Records that fail to map or validate
// are reported with their line number and skipped; the file itself being
// unreadable or the schema unknown is an error.
inline LoadResult load_records(const std::filesystem::path& path, const std::string& schema) {
  auto it = schema_registry().find(schema);
  if (it == schema_registry().end()) {
    throw std::invalid_argument("unknown dataset schema: " + schema);
  }
  JsonlFile file = read_jsonl(path);
  LoadResult out;
  out.rejects = file.rejects;
  for (const auto& line : file.lines) {
    try {
      TaskRecord record = it->second(line.value, line.line_number);
      record.validate();
      out.records.push_back(std::move(record));
    } catch (const std::exception& e) {
      out.rejects.push_back({line.line_number, e.what()});
    }
  }
  return out;
}

}  // namespace quasar
