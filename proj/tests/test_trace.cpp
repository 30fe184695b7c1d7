#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "quasar/trace.hpp"
#include "helpers.hpp"

using namespace quasar;

TEST_CASE("marker lines tolerate common decorations") {
  CHECK(detail::match_marker_line("Abstraction (s_1)") == 1);
  CHECK(detail::match_marker_line("# Abstraction (s1)") == 1);
  CHECK(detail::match_marker_line("**Formalisation (s_2)**") == 2);
  CHECK(detail::match_marker_line("### Formalization (s2):") == 2);
  CHECK(detail::match_marker_line("Explanation ($s_3$)") == 3);
  CHECK(detail::match_marker_line("Answering s4") == 4);
  CHECK(detail::match_marker_line("  answering (S_4).  ") == 4);

  CHECK_FALSE(detail::match_marker_line("Abstraction").has_value());
  CHECK_FALSE(detail::match_marker_line("Abstraction (s_2)").has_value());
  CHECK_FALSE(detail::match_marker_line("Abstraction (s_1) extra").has_value());
  CHECK_FALSE(detail::match_marker_line("The Abstraction (s_1)").has_value());
  CHECK_FALSE(detail::match_marker_line("Abstraction (s_0)").has_value());
}

TEST_CASE("full transcript parses into four ordered sections") {
  ReasoningTrace trace = parse_trace(testutil::fixture_text("transcripts/fog_quasar.txt"));

  CHECK(trace.complete());
  CHECK(trace.ordered_correctly);
  CHECK(trace.warnings.empty());
  CHECK(trace.preamble_end == 0);

  REQUIRE(trace.final_answer.has_value());
  CHECK(trace.final_answer->kind == AnswerKind::kNumeric);
  CHECK(trace.final_answer->numeric_value == Decimal(210));

  REQUIRE(trace.explanation_steps.size() == 5);
  CHECK(trace.explanation_steps[0].starts_with("**Step 1:**"));
  CHECK(trace.explanation_steps[4].starts_with("**Step 5:**"));

  const SymbolTable& sym = trace.symbols;
  REQUIRE(sym.predicates.size() == 2);
  CHECK(sym.predicates[0].name == "FogTime");
  CHECK(sym.predicates[0].arity == 2);
  CHECK(sym.predicates[1].arity == 1);
  REQUIRE(sym.variables.size() == 5);
  REQUIRE(sym.find_variable("d_total") != nullptr);
  CHECK(sym.find_variable("d_total")->value == Decimal(72));
  // Value is whatever follows the last '=' in a chained definition.
  CHECK(sym.find_variable("d_target")->value == Decimal(18));
  CHECK(sym.find_variable("v_initial")->value == Decimal(2, 15));
  CHECK(sym.find_variable("v_halved")->value == Decimal(1, 15));
  // Prose bullets with no name/value shape are skipped, not mangled.
  CHECK(sym.constants.empty());
}

TEST_CASE("sections partition the raw bytes") {
  for (const char* name : {"transcripts/fog_quasar.txt", "transcripts/dice_quasar.txt",
                           "transcripts/students_quasar.txt"}) {
    ReasoningTrace trace = parse_trace(testutil::fixture_text(name));
    REQUIRE(!trace.sections.empty());
    CHECK(trace.preamble_end == trace.sections.front().begin);
    std::string rebuilt = trace.raw.substr(0, trace.preamble_end);
    for (size_t i = 0; i < trace.sections.size(); ++i) {
      const TraceSection& s = trace.sections[i];
      CHECK(s.begin <= s.body_begin);
      CHECK(s.body_begin <= s.end);
      if (i + 1 < trace.sections.size()) CHECK(s.end == trace.sections[i + 1].begin);
      rebuilt += trace.raw.substr(s.begin, s.end - s.begin);
    }
    CHECK(trace.sections.back().end == trace.raw.size());
    CHECK(rebuilt == trace.raw);
  }
}

TEST_CASE("unstructured completions still yield an answer") {
  ReasoningTrace trace = parse_trace(testutil::fixture_text("transcripts/students_corrected.txt"));
  // "Formalisation (s_2)" mid-sentence is not a marker line.
  CHECK(trace.sections.empty());
  CHECK(!trace.complete());
  CHECK(trace.preamble_end == trace.raw.size());
  REQUIRE(trace.final_answer.has_value());
  CHECK(trace.final_answer->numeric_value == Decimal(146));
}

TEST_CASE("cot transcript has no sections and a fallback number") {
  ReasoningTrace trace = parse_trace(testutil::fixture_text("transcripts/fog_cot.txt"));
  CHECK(trace.sections.empty());
  REQUIRE(trace.final_answer.has_value());
  CHECK(trace.final_answer->numeric_value == Decimal(150));
}

TEST_CASE("duplicate markers keep the first section") {
  std::string text =
      "Abstraction (s_1)\nfirst body\n"
      "Abstraction (s_1)\nsecond body\n"
      "Answering (s_4)\nThe answer is 5.\n";
  ReasoningTrace trace = parse_trace(text);
  REQUIRE(trace.sections.size() == 2);
  CHECK(trace.section_body(1).find("first body") != std::string::npos);
  CHECK(trace.section_body(1).find("second body") != std::string::npos);
  REQUIRE(trace.warnings.size() == 1);
  CHECK(trace.warnings[0] == "duplicate marker for step 1");
}

TEST_CASE("out of order sections are flagged") {
  std::string text =
      "Formalisation (s_2)\nrules\n"
      "Abstraction (s_1)\nsymbols\n";
  ReasoningTrace trace = parse_trace(text);
  REQUIRE(trace.sections.size() == 2);
  CHECK(trace.sections[0].step == 2);
  CHECK_FALSE(trace.ordered_correctly);
  REQUIRE_FALSE(trace.warnings.empty());
  CHECK(trace.warnings.back() == "sections out of order");
}

TEST_CASE("preamble before the first marker is preserved") {
  std::string text =
      "Let me work through this.\n\n"
      "Abstraction (s_1)\n- Variables:\n- n = 3: count.\n"
      "Answering (s_4)\nThe answer is 3.\n";
  ReasoningTrace trace = parse_trace(text);
  CHECK(trace.preamble_end == std::string("Let me work through this.\n\n").size());
  REQUIRE(trace.sections.size() == 2);
  CHECK(trace.section_text(1).starts_with("Abstraction (s_1)"));
  CHECK(trace.section_body(1).starts_with("- Variables:"));
}

TEST_CASE("explanation splitting ignores text before the first step heading") {
  std::string text =
      "Explanation (s_3)\n"
      "We proceed in stages.\n"
      "Step 1: add the parts.\nmore detail\n"
      "Step 2: compare.\n"
      "Answering (s_4)\nThe answer is 9.\n";
  ReasoningTrace trace = parse_trace(text);
  REQUIRE(trace.explanation_steps.size() == 2);
  CHECK(trace.explanation_steps[0] == "Step 1: add the parts.\nmore detail");
  CHECK(trace.explanation_steps[1] == "Step 2: compare.");
}

TEST_CASE("explanation without headings is one step") {
  std::string text = "Explanation (s_3)\nJust multiply through and simplify.\n";
  ReasoningTrace trace = parse_trace(text);
  REQUIRE(trace.explanation_steps.size() == 1);
  CHECK(trace.explanation_steps[0] == "Just multiply through and simplify.");
}

TEST_CASE("symbol parsing keeps first duplicate and warns") {
  std::vector<std::string> warnings;
  SymbolTable table = parse_symbols(
      "Variables:\n- x = 1: first.\n- x = 2: second.\n- 9bad = 3: skipped.\n", &warnings);
  REQUIRE(table.variables.size() == 1);
  CHECK(table.variables[0].value == Decimal(1));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0] == "duplicate symbol dropped: x");
}

TEST_CASE("symbols without values keep descriptions") {
  SymbolTable table = parse_symbols(
      "Predicates:\n- Wins(a, b, c): a beats b by c points.\n"
      "Constants:\n- k: fixed margin.\n");
  REQUIRE(table.predicates.size() == 1);
  CHECK(table.predicates[0].arity == 3);
  CHECK(table.predicates[0].description == "a beats b by c points.");
  REQUIRE(table.constants.size() == 1);
  CHECK(table.constants[0].name == "k");
  CHECK_FALSE(table.constants[0].value.has_value());
}

TEST_CASE("parsing never throws on junk") {
  CHECK_NOTHROW(parse_trace(""));
  CHECK_NOTHROW(parse_trace("\n\n\n"));
  CHECK_NOTHROW(parse_trace(std::string(64, '\xff')));
  ReasoningTrace empty = parse_trace("");
  CHECK(empty.sections.empty());
  CHECK_FALSE(empty.final_answer.has_value());
}
