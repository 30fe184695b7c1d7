#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "quasar/io.hpp"
#include "quasar/loader.hpp"
#include "helpers.hpp"

using namespace quasar;

namespace {

LoadResult load_text(const testutil::TempDir& dir, const std::string& schema,
                     const std::string& jsonl) {
  auto path = dir / (schema + ".jsonl");
  atomic_write_file(path, jsonl);
  return load_records(path, schema);
}

}  // namespace

TEST_CASE("canonical task names") {
  CHECK(canonical_task_name("aqua_rat") == "AQuA");
  CHECK(canonical_task_name("GSM8K") == "GSM8K");
  CHECK(canonical_task_name(" svamp ") == "SVAMP");
  CHECK(canonical_task_name("mmlu_redux") == "MMLU-Redux");
  CHECK(canonical_task_name("OlympiadBench") == "OlyBench");
  CHECK(canonical_task_name("gpqa") == "GPQA");
  CHECK(canonical_task_name("drop") == "DROP");
  CHECK(canonical_task_name("MyBench") == "MyBench");
}

TEST_CASE("plain schema loads all three kinds") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "plain",
      R"({"task": "gsm8k", "kind": "numeric", "question": "2+2?", "gold": 4})"
      "\n"
      R"({"id": "p2", "task": "AQuA", "kind": "choice", "question": "pick", "choices": ["x", "y"], "gold": "b"})"
      "\n"
      R"({"id": "p3", "task": "DROP", "kind": "freetext", "question": "who?", "passage": "Sam ran.", "gold": "Sam"})"
      "\n");
  REQUIRE(result.rejects.empty());
  REQUIRE(result.records.size() == 3);

  const TaskRecord& num = result.records[0];
  CHECK(num.id == "gsm8k-1");
  CHECK(num.task == "GSM8K");
  CHECK(num.kind == AnswerKind::kNumeric);
  CHECK(num.gold.numeric_value == Decimal(4));

  const TaskRecord& mc = result.records[1];
  CHECK(mc.gold.choice_label == 'B');
  REQUIRE(mc.choices.size() == 2);
  CHECK(mc.choices[0].label == 'A');
  CHECK(mc.choices[1].text == "y");
  CHECK(mc.question_text() == "pick\nAnswer Choices:\n(A) x\n(B) y");
  CHECK(mc.judge_target_text() == "B) y");

  const TaskRecord& ft = result.records[2];
  CHECK(ft.gold.text_value == "Sam");
  CHECK(ft.question_text() == "Sam ran.\n\nwho?");
}

TEST_CASE("gsm8k schema reads the #### line") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "gsm8k",
      R"({"question": "Count.", "answer": "work\n#### 18"})"
      "\n"
      R"({"question": "Big.", "answer": "steps\n#### 1,320"})"
      "\n"
      R"({"question": "Broken.", "answer": "no final line"})"
      "\n");
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].id == "gsm8k-1");
  CHECK(result.records[0].gold.numeric_value == Decimal(18));
  CHECK(result.records[1].gold.numeric_value == Decimal(1320));
  REQUIRE(result.rejects.size() == 1);
  CHECK(result.rejects[0].line_number == 3);
  CHECK(result.rejects[0].reason == "no #### answer line");
}

TEST_CASE("aqua schema strips embedded option labels") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "aqua",
      R"({"question": "How far?", "options": ["A)3 km", "B) 5 km", "c: 7 km", "9 km", "E.11 km"], "correct": "C"})"
      "\n");
  REQUIRE(result.rejects.empty());
  REQUIRE(result.records.size() == 1);
  const TaskRecord& r = result.records[0];
  CHECK(r.task == "AQuA");
  REQUIRE(r.choices.size() == 5);
  CHECK(r.choices[0].text == "3 km");
  CHECK(r.choices[1].text == "5 km");
  CHECK(r.choices[2].text == "7 km");
  CHECK(r.choices[3].text == "9 km");
  CHECK(r.choices[4].text == "11 km");
  CHECK(r.gold.choice_label == 'C');
  CHECK(r.gold_choice()->text == "7 km");
}

TEST_CASE("svamp schema joins body and question") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "svamp",
      R"({"ID": "sv-1", "Body": "Ann has 3 bags. ", "Question": "How many bags?", "Answer": 3})"
      "\n"
      R"({"Body": "Scale.", "Question": "Weight?", "Answer": 72.5})"
      "\n");
  REQUIRE(result.rejects.empty());
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].id == "sv-1");
  CHECK(result.records[0].stem == "Ann has 3 bags. How many bags?");
  CHECK(result.records[1].id == "svamp-2");
  CHECK(result.records[1].gold.numeric_value == Decimal(145, 2));
}

TEST_CASE("mmlu-redux and gpqa schemas take index or letter answers") {
  testutil::TempDir dir;
  LoadResult mmlu = load_text(
      dir, "mmlu-redux",
      R"({"question": "Which gas?", "choices": ["O2", "N2", "CO2", "He"], "answer": 2})"
      "\n");
  REQUIRE(mmlu.records.size() == 1);
  CHECK(mmlu.records[0].task == "MMLU-Redux");
  CHECK(mmlu.records[0].gold.choice_label == 'C');

  LoadResult gpqa = load_text(
      dir, "gpqa",
      R"({"question": "Which state?", "choices": ["solid", "liquid", "gas", "plasma"], "answer": "B"})"
      "\n"
      R"({"question": "Bad.", "choices": ["x", "y"], "answer": 5})"
      "\n");
  REQUIRE(gpqa.records.size() == 1);
  CHECK(gpqa.records[0].gold.choice_label == 'B');
  REQUIRE(gpqa.rejects.size() == 1);
  CHECK(gpqa.rejects[0].line_number == 2);
}

TEST_CASE("olybench schema prefers numeric answers") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "olybench",
      R"({"question": "Sum?", "final_answer": ["36"]})"
      "\n"
      R"({"question": "Shape?", "final_answer": "a regular hexagon"})"
      "\n");
  REQUIRE(result.rejects.empty());
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].kind == AnswerKind::kNumeric);
  CHECK(result.records[0].gold.numeric_value == Decimal(36));
  CHECK(result.records[1].kind == AnswerKind::kFreeText);
  CHECK(result.records[1].gold.text_value == "a regular hexagon");
}

TEST_CASE("drop schema keeps the passage and infers the kind") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "drop",
      R"({"query_id": "d-7", "passage": "The team scored 21 points.", "question": "How many points?", "answer": "21"})"
      "\n"
      R"({"passage": "Lee moved to Oslo.", "question": "Where?", "answer": "Oslo"})"
      "\n");
  REQUIRE(result.rejects.empty());
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].id == "d-7");
  CHECK(result.records[0].kind == AnswerKind::kNumeric);
  CHECK(result.records[0].question_text() ==
        "The team scored 21 points.\n\nHow many points?");
  CHECK(result.records[1].kind == AnswerKind::kFreeText);
  CHECK(result.records[1].gold.text_value == "Oslo");
}

TEST_CASE("malformed lines are rejected with their line numbers") {
  testutil::TempDir dir;
  LoadResult result = load_text(
      dir, "plain",
      R"({"task": "GSM8K", "kind": "numeric", "question": "ok?", "gold": 1})"
      "\n"
      "not json at all\n"
      R"({"task": "GSM8K", "kind": "numeric", "question": "   ", "gold": 2})"
      "\n");
  CHECK(result.records.size() == 1);
  REQUIRE(result.rejects.size() == 2);
  CHECK(result.rejects[0].line_number == 2);
  CHECK(result.rejects[1].line_number == 3);
  CHECK(result.rejects[1].reason.find("empty question") != std::string::npos);
}

TEST_CASE("unknown schema is an error") {
  testutil::TempDir dir;
  auto path = dir / "x.jsonl";
  atomic_write_file(path, "{}\n");
  CHECK_THROWS_AS(load_records(path, "nope"), std::invalid_argument);
  CHECK_THROWS(load_records(dir / "missing.jsonl", "plain"));
}

TEST_CASE("known schemas cover every registered mapper") {
  auto names = known_schemas();
  CHECK(names == std::vector<std::string>{"aqua", "drop", "gpqa", "gsm8k", "mmlu-redux",
                                          "olybench", "plain", "svamp"});
}

TEST_CASE("bundled fixtures load cleanly") {
  LoadResult numeric = load_records(testutil::fixture_path("e2e/records.jsonl"), "plain");
  CHECK(numeric.rejects.empty());
  REQUIRE(numeric.records.size() == 20);
  for (const auto& r : numeric.records) {
    CHECK(r.task == "GSM8K");
    CHECK(r.kind == AnswerKind::kNumeric);
  }
  CHECK(numeric.records[0].id == "e2e-001");
  CHECK(numeric.records[0].gold.numeric_value == Decimal(31));

  LoadResult choices = load_records(testutil::fixture_path("e2e/choices.jsonl"), "plain");
  CHECK(choices.rejects.empty());
  REQUIRE(choices.records.size() == 8);
  for (const auto& r : choices.records) {
    CHECK(r.task == "AQuA");
    CHECK(r.kind == AnswerKind::kChoice);
    REQUIRE(r.choices.size() == 5);
    CHECK(r.gold_choice() != nullptr);
  }
  CHECK(choices.records[2].gold.choice_label == 'D');
}
