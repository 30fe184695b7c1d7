#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>

#include "helpers.hpp"
#include "quasar/prompt.hpp"

using namespace quasar;

namespace {

const std::string kFogQuestion =
    "A fog bank rolls in from the ocean to cover a city. It takes 75 minutes to cover every 10 "
    "miles of the city. However, we know that the wind speed is going to be halved in one hour. "
    "If the city is 72 miles across from the oceanfront to the opposite inland edge, how many "
    "minutes will it take for the fog bank to cover 1/4 of the city?";

PromptLibrary library() { return PromptLibrary(testutil::prompts_dir()); }

}  // namespace

TEST_CASE("structured renders match the frozen snapshots byte for byte") {
  PromptLibrary prompts = library();
  const std::map<std::string, StrategyVariant> cases = {
      {"quasar", StrategyVariant::quasar()},
      {"quasar_wo1", StrategyVariant::quasar_without({1})},
      {"quasar_wo2", StrategyVariant::quasar_without({2})},
      {"quasar_wo3", StrategyVariant::quasar_without({3})},
      {"quasar_wo4", StrategyVariant::quasar_without({4})},
      {"quasar_wo12", StrategyVariant::quasar_without({1, 2})},
      {"quasar_wo34", StrategyVariant::quasar_without({3, 4})},
  };
  for (const auto& [name, variant] : cases) {
    INFO(name);
    RenderedPrompt rendered = prompts.render(variant, kFogQuestion);
    CHECK(rendered.full_text == testutil::fixture_text("golden/" + name + ".txt"));
    CHECK(rendered.strategy_id == name);
  }
}

TEST_CASE("step omission removes whole blocks but never rewrites survivors") {
  PromptLibrary prompts = library();
  std::string wo1 = prompts.render(StrategyVariant::quasar_without({1}), kFogQuestion).full_text;
  CHECK(wo1.find("Abstraction (s_1)") == std::string::npos);
  CHECK(wo1.find("Formalisation (s_2)") != std::string::npos);
  CHECK(wo1.find("Explanation (s_3)") != std::string::npos);
  CHECK(wo1.find("Answering (s_4)") != std::string::npos);
  // Block 2 cites s_1; deletion is literal, so the dangling reference stays.
  CHECK(wo1.find("defined in s_1") != std::string::npos);
  // Survivors keep their original numbering.
  CHECK(wo1.find("\n2) ") != std::string::npos);
  CHECK(wo1.find("\n1) ") == std::string::npos);

  std::string wo12 =
      prompts.render(StrategyVariant::quasar_without({1, 2}), kFogQuestion).full_text;
  CHECK(wo12.find("(s_1)") == std::string::npos);
  CHECK(wo12.find("Formalisation (s_2)") == std::string::npos);
  CHECK(wo12.find("formalisation in s_2") != std::string::npos);
}

TEST_CASE("reassembling all blocks in order reproduces the template bytes") {
  std::string raw = read_text_file(testutil::prompts_dir() / "quasar.txt");
  PromptTemplate tmpl = PromptTemplate::from_string(raw);
  CHECK(tmpl.with_steps({1, 2, 3, 4}) == raw);
}

TEST_CASE("shuffled order permutes blocks without renumbering") {
  std::string raw = read_text_file(testutil::prompts_dir() / "quasar.txt");
  PromptTemplate tmpl = PromptTemplate::from_string(raw);
  std::string swapped = tmpl.with_steps({2, 1, 3, 4});
  CHECK(swapped != raw);
  CHECK(swapped.size() == raw.size());
  // Same bytes, different arrangement: every block text still present.
  for (int step = 1; step <= 4; ++step) {
    CHECK(swapped.find(tmpl.step_text(step)) != std::string::npos);
  }
  size_t two = swapped.find("2) ");
  size_t one = swapped.find("1) ", swapped.find("#Steps"));
  REQUIRE(two != std::string::npos);
  REQUIRE(one != std::string::npos);
  CHECK(two < one);
}

TEST_CASE("seeded shuffle variants render deterministically") {
  PromptLibrary prompts = library();
  auto a = prompts.render(StrategyVariant::quasar_shuffled(42), kFogQuestion);
  auto b = prompts.render(StrategyVariant::quasar_shuffled(42), kFogQuestion);
  CHECK(a.full_text == b.full_text);
  for (const char* marker :
       {"Abstraction (s_1)", "Formalisation (s_2)", "Explanation (s_3)", "Answering (s_4)"}) {
    CHECK(a.full_text.find(marker) != std::string::npos);
  }
}

TEST_CASE("baseline and cot renders") {
  PromptLibrary prompts = library();
  std::string base = prompts.render(StrategyVariant::baseline(), "What is 2 + 2?").full_text;
  CHECK(base.find("What is 2 + 2?") != std::string::npos);
  CHECK(base.find("#Steps") == std::string::npos);
  CHECK(base.find("step by step") == std::string::npos);

  std::string cot = prompts.render(StrategyVariant::cot(), "What is 2 + 2?").full_text;
  CHECK(cot.find("Let's think step by step.") != std::string::npos);
  CHECK(cot.find("#Steps") == std::string::npos);
}

TEST_CASE("rendered prompt exposes its parts") {
  PromptLibrary prompts = library();
  RenderedPrompt r = prompts.render(StrategyVariant::quasar(), kFogQuestion);
  CHECK(r.role_text.find("experienced expert") != std::string::npos);
  CHECK(r.question_text == kFogQuestion);
  REQUIRE(r.steps_text.size() == 4);
  CHECK(r.steps_text[0].rfind("1) ", 0) == 0);
  for (const auto& step : r.steps_text) {
    CHECK(r.full_text.find(step) != std::string::npos);
  }
  RenderedPrompt wo2 = prompts.render(StrategyVariant::quasar_without({2}), kFogQuestion);
  REQUIRE(wo2.steps_text.size() == 3);
  CHECK(wo2.steps_text[1].rfind("3) ", 0) == 0);
}

TEST_CASE("the question placeholder is mandatory") {
  PromptLibrary prompts = library();
  CHECK_THROWS_AS(prompts.render(StrategyVariant::quasar(), ""), std::invalid_argument);
  CHECK_THROWS_AS(prompts.render(StrategyVariant::quasar(), "  \n "), std::invalid_argument);
  CHECK_THROWS_AS(fill_placeholder("no slot here", "question", "x"), TemplateError);
  CHECK(fill_placeholder("Q: {question}!", "question", "why") == "Q: why!");
}

TEST_CASE("judge prompt embeds raw output and target") {
  PromptLibrary prompts = library();
  std::string judge = prompts.render_judge("The answer is 210 minutes.", "210");
  CHECK(judge.find("Generated Answer: The answer is 210 minutes.") != std::string::npos);
  CHECK(judge.find("Target Answer: 210.") != std::string::npos);
  CHECK(judge.find("respond with '1'") != std::string::npos);
  CHECK(judge.find("#Sentences:") != std::string::npos);
}

TEST_CASE("correction prompt carries question and previous answer") {
  PromptLibrary prompts = library();
  std::string c = prompts.render_correction("How many bakers?", "The answer is 143.");
  CHECK(c.find("#Question\nHow many bakers?") != std::string::npos);
  CHECK(c.find("#Previous Answer\nThe answer is 143.") != std::string::npos);
  CHECK(c.find("\"The answer is \"") != std::string::npos);
}

TEST_CASE("template parsing surfaces missing structure") {
  PromptTemplate flat = PromptTemplate::from_string("no headers at all");
  CHECK(flat.sections().empty());
  CHECK_THROWS_AS(flat.with_steps({1}), TemplateError);

  PromptTemplate ok = PromptTemplate::from_string("#Steps\n1) a\n2) b\n#Question\n{question}\n");
  CHECK(ok.steps().size() == 2);
  CHECK_THROWS_AS(ok.step_text(3), TemplateError);
  CHECK_THROWS_AS(ok.with_steps({1, 3}), TemplateError);

  CHECK_THROWS_AS(PromptTemplate::from_string("#Steps\n2) b\n1) a\n"), TemplateError);
}
