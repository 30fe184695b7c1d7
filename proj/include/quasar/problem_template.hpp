#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "quasar/expr.hpp"
#include "quasar/jsonl.hpp"
#include "quasar/prompt.hpp"
#include "quasar/record.hpp"
#include "quasar/rng.hpp"
#include "quasar/trace.hpp"

namespace quasar {

struct SlotValue {
  std::string text;
  std::optional<Decimal> number;
};

using TemplateBinding = std::map<std::string, SlotValue>;

struct InstantiatedProblem {
  TaskRecord record;
  TemplateBinding binding;
};

// A parameterised word problem: body text with {{slot}} holes, slot domains,
// an exact answer formula over the numeric slots, and optional constraint
// expressions. `require` clauses may reference the reserved identifier
// `answer`; bindings that violate any clause are resampled.
class ProblemTemplate {
 public:
  struct Slot {
    enum class Kind { kInteger, kDecimal, kName };
    Kind kind = Kind::kInteger;
    std::string name;
    std::vector<std::string> values;  // kName, or explicit integer values
    Decimal min, max;
    Decimal step{1};
    int scale = 0;  // kDecimal: fraction digits of the sampling grid
  };

  static ProblemTemplate load(const std::filesystem::path& path) {
    Json doc;
    try {
      doc = Json::parse(read_text_file(path));
    } catch (const std::exception& e) {
      throw TemplateError(path.string() + ": " + e.what());
    }
    return from_json(doc);
  }

  static ProblemTemplate from_json(const Json& doc) {
    ProblemTemplate t;
    t.id_ = doc.at("id").get<std::string>();
    t.task_ = doc.contains("task") ? doc.at("task").get<std::string>() : "Synthetic";
    t.body_ = doc.at("body").get<std::string>();
    for (const auto& s : doc.at("slots")) {
      Slot slot;
      slot.name = s.at("name").get<std::string>();
      std::string kind = s.at("kind").get<std::string>();
      if (kind == "integer") {
        slot.kind = Slot::Kind::kInteger;
        if (s.contains("values")) {
          for (const auto& v : s.at("values")) slot.values.push_back(v.dump());
        } else {
          slot.min = Decimal(s.at("min").get<std::int64_t>());
          slot.max = Decimal(s.at("max").get<std::int64_t>());
          if (s.contains("step")) slot.step = Decimal(s.at("step").get<std::int64_t>());
        }
      } else if (kind == "decimal") {
        slot.kind = Slot::Kind::kDecimal;
        slot.scale = s.contains("scale") ? s.at("scale").get<int>() : 1;
        slot.min = Decimal::parse(s.at("min").dump());
        slot.max = Decimal::parse(s.at("max").dump());
      } else if (kind == "name") {
        slot.kind = Slot::Kind::kName;
        for (const auto& v : s.at("values")) slot.values.push_back(v.get<std::string>());
        if (slot.values.empty()) throw TemplateError(slot.name + ": empty value list");
      } else {
        throw TemplateError("unknown slot kind: " + kind);
      }
      t.slots_.push_back(std::move(slot));
    }
    t.answer_ = Expression::parse(doc.at("answer").get<std::string>());
    if (doc.contains("require")) {
      for (const auto& clause : doc.at("require")) {
        t.requires_.push_back(Expression::parse(clause.get<std::string>()));
      }
    }
    t.validate();
    return t;
  }

  const std::string& id() const { return id_; }
  const std::string& task() const { return task_; }
  const std::string& body() const { return body_; }
  const std::vector<Slot>& slots() const { return slots_; }

  Decimal answer_for(const std::map<std::string, Decimal>& numeric_binding) const {
    return answer_.evaluate(numeric_binding);
  }

  // Deterministic generation: instance i depends only on (seed, i), so a
  // prefix of a longer run is bitwise-identical to a shorter run.
  std::vector<InstantiatedProblem> instantiate(std::uint64_t seed, size_t count) const {
    std::vector<InstantiatedProblem> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      std::mt19937_64 rng(mix_seed(seed, i));
      out.push_back(instantiate_one(rng, seed, i));
    }
    return out;
  }

 private:
  static constexpr int kMaxResamples = 1000;

  InstantiatedProblem instantiate_one(std::mt19937_64& rng, std::uint64_t seed, size_t index) const {
    for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
      TemplateBinding binding;
      std::map<std::string, Decimal> numbers;
      for (const auto& slot : slots_) {
        SlotValue value = sample_slot(slot, rng);
        if (value.number) numbers[slot.name] = *value.number;
        binding[slot.name] = std::move(value);
      }
      Decimal answer;
      try {
        answer = answer_.evaluate(numbers);
      } catch (const std::exception&) {
        continue;  // e.g. division by zero under this binding
      }
      numbers["answer"] = answer;
      bool ok = true;
      for (const auto& clause : requires_) {
        if (clause.evaluate(numbers).is_zero()) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      InstantiatedProblem problem;
      problem.binding = std::move(binding);
      problem.record.id = id_ + "-s" + std::to_string(seed) + "-" + std::to_string(index);
      problem.record.task = task_;
      problem.record.kind = AnswerKind::kNumeric;
      problem.record.stem = fill_body(problem.binding);
      problem.record.gold = FinalAnswer::numeric(answer);
      problem.record.validate();
      return problem;
    }
    throw TemplateError(id_ + ": constraints not satisfiable within " +
                        std::to_string(kMaxResamples) + " attempts");
  }

  SlotValue sample_slot(const Slot& slot, std::mt19937_64& rng) const {
    SlotValue out;
    switch (slot.kind) {
      case Slot::Kind::kName:
        out.text = slot.values[uniform_below(rng, slot.values.size())];
        return out;
      case Slot::Kind::kInteger: {
        if (!slot.values.empty()) {
          out.text = slot.values[uniform_below(rng, slot.values.size())];
          out.number = Decimal::parse(out.text);
          return out;
        }
        std::int64_t lo = slot.min.numerator();
        std::int64_t hi = slot.max.numerator();
        std::int64_t step = slot.step.numerator();
        std::int64_t steps = (hi - lo) / step;
        std::int64_t k = uniform_range(rng, 0, steps);
        out.number = Decimal(lo + k * step);
        out.text = out.number->to_string();
        return out;
      }
      case Slot::Kind::kDecimal: {
        Decimal unit(1);
        for (int i = 0; i < slot.scale; ++i) unit = unit / Decimal(10);
        std::int64_t steps = ((slot.max - slot.min) / unit).floor().numerator();
        std::int64_t k = uniform_range(rng, 0, steps);
        out.number = slot.min + unit * Decimal(k);
        out.text = out.number->to_string();
        return out;
      }
    }
    throw TemplateError("unreachable slot kind");
  }

  std::string fill_body(const TemplateBinding& binding) const {
    std::string out;
    out.reserve(body_.size());
    size_t pos = 0;
    while (pos < body_.size()) {
      size_t open = body_.find("{{", pos);
      if (open == std::string::npos) {
        out.append(body_, pos, body_.size() - pos);
        break;
      }
      out.append(body_, pos, open - pos);
      size_t close = body_.find("}}", open);
      std::string name = body_.substr(open + 2, close - open - 2);
      out += binding.at(name).text;
      pos = close + 2;
    }
    return out;
  }

  void validate() const {
    std::set<std::string> names;
    for (const auto& slot : slots_) {
      if (!detail::is_identifier(slot.name)) throw TemplateError("bad slot name: " + slot.name);
      if (!names.insert(slot.name).second) {
        throw TemplateError("duplicate slot name: " + slot.name);
      }
      if (slot.kind != Slot::Kind::kName && slot.values.empty()) {
        if (slot.max < slot.min) throw TemplateError(slot.name + ": empty range");
        if (slot.kind == Slot::Kind::kInteger && slot.step.numerator() <= 0) {
          throw TemplateError(slot.name + ": step must be positive");
        }
      }
      if (body_.find("{{" + slot.name + "}}") == std::string::npos) {
        throw TemplateError(slot.name + ": slot does not appear in body");
      }
    }
    // Every hole in the body must be a declared slot.
    size_t pos = 0;
    while ((pos = body_.find("{{", pos)) != std::string::npos) {
      size_t close = body_.find("}}", pos);
      if (close == std::string::npos) throw TemplateError("unterminated {{ in body");
      std::string name = body_.substr(pos + 2, close - pos - 2);
      if (!names.count(name)) throw TemplateError("undeclared slot in body: " + name);
      pos = close + 2;
    }
    std::set<std::string> numeric;
    for (const auto& slot : slots_) {
      if (slot.kind != Slot::Kind::kName) numeric.insert(slot.name);
    }
    for (const auto& ident : answer_.identifiers()) {
      if (!numeric.count(ident)) {
        throw TemplateError("answer formula uses unknown value: " + ident);
      }
    }
    for (const auto& clause : requires_) {
      for (const auto& ident : clause.identifiers()) {
        if (ident != "answer" && !numeric.count(ident)) {
          throw TemplateError("constraint uses unknown value: " + ident);
        }
      }
    }
  }

  std::string id_;
  std::string task_;
  std::string body_;
  std::vector<Slot> slots_;
  Expression answer_{Expression::parse("0")};
  std::vector<Expression> requires_;
};

inline std::vector<TaskRecord> instantiate_records(const ProblemTemplate& tmpl,
                                                   std::uint64_t seed, size_t count) {
  std::vector<TaskRecord> out;
  for (auto& p : tmpl.instantiate(seed, count)) out.push_back(std::move(p.record));
  return out;
}

}  // namespace quasar
