#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "quasar/demo.hpp"
#include "helpers.hpp"

using namespace quasar;

namespace {

// Replies chosen by substring match on the prompt, so scripted batches stay
// deterministic under concurrency.
class MapBackend : public ChatBackend {
 public:
  std::string complete(const ModelEndpoint&, const ChatRequest& request) override {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [needle, reply] : routes_) {
      if (request.prompt.find(needle) != std::string::npos) return reply;
    }
    throw BackendError("no scripted route", false);
  }

  std::string kind() const override { return "fake"; }

  void route(std::string needle, std::string reply) {
    std::lock_guard<std::mutex> lock(mutex_);
    routes_.emplace_back(std::move(needle), std::move(reply));
  }

 private:
  std::mutex mutex_;
  std::vector<std::pair<std::string, std::string>> routes_;
};

GatewayOptions no_sleep() {
  GatewayOptions options;
  options.sleep_ms = [](int) {};
  return options;
}

TaskRecord gsm_record(const std::string& id, const std::string& stem, Decimal gold) {
  TaskRecord r;
  r.id = id;
  r.task = "GSM8K";
  r.kind = AnswerKind::kNumeric;
  r.stem = stem;
  r.gold = FinalAnswer::numeric(gold);
  return r;
}

TaskRecord aqua_record(const std::string& id, const std::string& stem) {
  TaskRecord r;
  r.id = id;
  r.task = "AQuA";
  r.kind = AnswerKind::kChoice;
  r.stem = stem;
  r.choices = {{'A', "one"}, {'B', "two"}, {'C', "three"}};
  r.gold = FinalAnswer::choice('B');
  return r;
}

std::string full_trace(const std::string& marker, const std::string& answer_line) {
  return "Abstraction (s_1)\nVariables:\n- x = 1: a value. " + marker +
         "\n\nFormalisation (s_2)\ntotal = x * 10.\n\nExplanation (s_3)\nStep 1: multiply "
         "x by 10.\n\nAnswering (s_4)\n" +
         answer_line + "\n";
}

std::string gapped_trace(const std::string& answer_line) {
  return "Abstraction (s_1)\n- x = 1: a value.\n\nExplanation (s_3)\nStep 1: direct.\n\n"
         "Answering (s_4)\n" +
         answer_line + "\n";
}

Demonstration kept_demo(TaskRecord record, const std::string& trace_text) {
  Demonstration demo;
  demo.record = std::move(record);
  demo.trace = parse_trace(trace_text);
  demo.teacher_endpoint = "teacher";
  demo.generation_ok = true;
  demo.passed_exact_gate = true;
  return demo;
}

struct Pipeline {
  std::vector<TaskRecord> records;
  std::shared_ptr<MapBackend> teacher_backend = std::make_shared<MapBackend>();

  Pipeline() {
    records = {
        gsm_record("d1", "Ten times one? say ONE", Decimal(10)),
        gsm_record("d2", "Twenty total? say TWO", Decimal(20)),
        gsm_record("d3", "Thirty total? say THREE", Decimal(30)),
        gsm_record("d4", "Forty total? say FOUR", Decimal(40)),
        gsm_record("d5", "Fifty total? say FIVE", Decimal(50)),
        gsm_record("d6", "Sixty total? say SIX", Decimal(60)),
    };
    teacher_backend->route("say ONE", full_trace("alphaONE", "The answer is 10."));
    teacher_backend->route("say TWO", gapped_trace("The answer is 20."));
    teacher_backend->route("say THREE", full_trace("alphaTHREE", "The answer is 31."));
    // d4 has no route: its generation fails.
    teacher_backend->route("say FIVE", full_trace("alphaFIVE", "The answer is 50."));
    teacher_backend->route("say SIX", full_trace("alphaSIX", "The answer is 60."));
  }
};

}  // namespace

TEST_CASE("generation failures become failed demonstrations, not exceptions") {
  Pipeline p;
  Gateway gateway(p.teacher_backend, no_sleep());
  PromptLibrary prompts(testutil::prompts_dir());
  ModelEndpoint teacher;
  teacher.name = "teacher";
  teacher.model_id = "m-teach";

  auto demos =
      generate_demonstrations(p.records, teacher, StrategyVariant::quasar(), gateway, prompts);
  REQUIRE(demos.size() == 6);
  for (size_t i = 0; i < demos.size(); ++i) {
    CHECK(demos[i].record.id == p.records[i].id);
    CHECK(demos[i].teacher_endpoint == "teacher");
  }
  CHECK(demos[0].generation_ok);
  CHECK_FALSE(demos[3].generation_ok);
  CHECK(demos[3].error.find("no scripted route") != std::string::npos);
  CHECK(demos[3].trace.raw.empty());

  GatePartition exact = filter_exact(std::move(demos));
  REQUIRE(exact.kept.size() == 4);  // d1 d2 d5 d6; d3 wrong, d4 failed
  REQUIRE(exact.dropped.size() == 2);
  for (const auto& d : exact.kept) CHECK(d.passed_exact_gate);
  for (const auto& d : exact.dropped) CHECK_FALSE(d.passed_exact_gate);
  CHECK(exact.dropped[0].record.id == "d3");
  CHECK(exact.dropped[1].record.id == "d4");

  SECTION("structural gate only, no judge") {
    StepGateResult gate = filter_steps(std::move(exact.kept), nullptr);
    REQUIRE(gate.kept.size() == 3);  // d2 lacks the second section
    CHECK(gate.dropped.size() == 1);
    CHECK(gate.dropped[0].record.id == "d2");
    CHECK(gate.dropped[0].passed_step_gate == false);
    CHECK(gate.undecided.empty());
    for (const auto& d : gate.kept) CHECK(d.passed_step_gate == true);
  }

  SECTION("judge confirms structurally sound demonstrations") {
    auto judge_backend = std::make_shared<MapBackend>();
    judge_backend->route("alphaONE", "1");
    judge_backend->route("alphaFIVE", "0");
    judge_backend->route("alphaSIX", "definitely");
    Gateway judge_gateway(judge_backend, no_sleep());
    JudgeContext judge;
    judge.gateway = &judge_gateway;
    judge.prompts = &prompts;
    judge.endpoint.name = "judge";
    judge.endpoint.model_id = "m-judge";

    StepGateResult gate = filter_steps(std::move(exact.kept), &judge);
    REQUIRE(gate.kept.size() == 1);
    CHECK(gate.kept[0].record.id == "d1");
    CHECK(gate.kept[0].judge_step_verdict_raw == "1");

    REQUIRE(gate.dropped.size() == 2);  // d2 structurally, d5 by verdict
    CHECK(gate.dropped[0].record.id == "d2");
    CHECK_FALSE(gate.dropped[0].judge_step_verdict_raw.has_value());
    CHECK(gate.dropped[1].record.id == "d5");

    REQUIRE(gate.undecided.size() == 1);
    CHECK(gate.undecided[0].record.id == "d6");
    CHECK(gate.undecided[0].error.find("outside 0/1 contract") != std::string::npos);

    // The structural failure spent no judge call: three calls for d1 d5 d6.
    CHECK(judge_gateway.stats().requests == 3);
  }
}

TEST_CASE("step gate insists on the exact gate having run") {
  Demonstration raw;
  raw.record = gsm_record("x", "q", Decimal(1));
  raw.trace = parse_trace(full_trace("m", "The answer is 1."));
  CHECK_THROWS_AS(filter_steps({raw}, nullptr), std::invalid_argument);
}

TEST_CASE("step presence checks sections and bodies") {
  ReasoningTrace gapped = parse_trace(gapped_trace("The answer is 20."));
  CHECK_FALSE(check_step_presence(gapped, {1, 2, 3, 4}));
  CHECK(check_step_presence(gapped, {1, 3, 4}));

  ReasoningTrace hollow = parse_trace("Abstraction (s_1)\n\nFormalisation (s_2)\nbody\n");
  CHECK_FALSE(check_step_presence(hollow, {1}));
  CHECK(check_step_presence(hollow, {2}));
}

TEST_CASE("alpha is the four sections joined by blank lines") {
  std::string text = full_trace("mk", "The answer is 10.");
  ReasoningTrace trace = parse_trace(text);
  std::string alpha = demonstration_alpha(trace);
  CHECK(alpha ==
        trace.section_text(1) + "\n\n" + trace.section_text(2) + "\n\n" +
            trace.section_text(3) + "\n\n" + trace.section_text(4));

  // Alpha still parses as a complete trace with the same section bodies.
  ReasoningTrace reparsed = parse_trace(alpha);
  CHECK(reparsed.complete());
  for (int s = 1; s <= 4; ++s) CHECK(reparsed.section_body(s) == trace.section_body(s));
  CHECK(demonstration_alpha(reparsed) == alpha);

  ReasoningTrace incomplete = parse_trace(gapped_trace("The answer is 20."));
  CHECK_THROWS_AS(demonstration_alpha(incomplete), std::invalid_argument);
}

TEST_CASE("training examples end with the gold answer") {
  Demonstration demo = kept_demo(gsm_record("d1", "Ten times one?", Decimal(10)),
                                 full_trace("mk", "The answer is 10."));
  TrainingExample example = make_training_example(demo);
  CHECK(example.question == demo.record.question_text());
  CHECK(example.target == example.alpha + "\n\nThe answer is 10");
  CHECK(example.task == "GSM8K");
  CHECK(example.source_id == "d1");
  CHECK(example.teacher == "teacher");

  auto parsed = extract_final_answer(example.target, AnswerKind::kNumeric);
  REQUIRE(parsed.has_value());
  CHECK(parsed->numeric_value == Decimal(10));

  Demonstration mc = kept_demo(aqua_record("a1", "Pick two."),
                               full_trace("mk2", "The answer is (B)."));
  TrainingExample mc_example = make_training_example(mc);
  CHECK(mc_example.target.ends_with("\n\nThe answer is B"));
}

TEST_CASE("balanced export caps per task deterministically") {
  testutil::TempDir dir;
  std::vector<Demonstration> kept;
  for (int i = 0; i < 7; ++i) {
    kept.push_back(kept_demo(
        gsm_record("g" + std::to_string(i), "sum " + std::to_string(i) + "?", Decimal(i)),
        full_trace("g" + std::to_string(i), "The answer is " + std::to_string(i) + ".")));
  }
  for (int i = 0; i < 5; ++i) {
    kept.push_back(kept_demo(aqua_record("a" + std::to_string(i), "pick " + std::to_string(i)),
                             full_trace("a" + std::to_string(i), "The answer is (B).")));
  }

  std::map<std::string, size_t> caps = {{"GSM8K", 4}, {"AQuA", 99}};
  auto out_path = dir / "demos.jsonl";
  ExportResult result = balance_and_export(kept, caps, 11, out_path);

  CHECK(result.stats.exported == 9);
  CHECK(result.stats.exported_per_task.at("GSM8K") == 4);
  CHECK(result.stats.exported_per_task.at("AQuA") == 5);
  REQUIRE(result.stats.warnings.size() == 1);
  CHECK(result.stats.warnings[0].find("AQuA") != std::string::npos);
  CHECK(result.stats.warnings[0].find("99") != std::string::npos);

  REQUIRE(result.examples.size() == 9);
  // Tasks alphabetical, items in generation order within a task.
  for (size_t i = 0; i < 5; ++i) CHECK(result.examples[i].task == "AQuA");
  for (size_t i = 5; i < 9; ++i) CHECK(result.examples[i].task == "GSM8K");
  for (size_t i = 1; i < 5; ++i) {
    CHECK(result.examples[i - 1].source_id < result.examples[i].source_id);
  }
  for (size_t i = 6; i < 9; ++i) {
    CHECK(result.examples[i - 1].source_id < result.examples[i].source_id);
  }

  std::string content = read_text_file(out_path);
  CHECK(sha256_hex(content) == result.export_sha256);
  JsonlFile file = read_jsonl(out_path);
  CHECK(file.rejects.empty());
  REQUIRE(file.lines.size() == 9);
  CHECK(file.lines[0].value.at("task") == "AQuA");

  // Same seed, same bytes; the subset depends on the seed.
  ExportResult again = balance_and_export(kept, caps, 11, dir / "demos2.jsonl");
  CHECK(again.export_sha256 == result.export_sha256);

  auto ids_of = [](const ExportResult& r) {
    std::vector<std::string> ids;
    for (const auto& e : r.examples) {
      if (e.task == "GSM8K") ids.push_back(e.source_id);
    }
    return ids;
  };
  bool any_differs = false;
  for (std::uint64_t seed = 12; seed < 22 && !any_differs; ++seed) {
    ExportResult other = balance_and_export(kept, caps, seed, dir / "demos3.jsonl");
    if (ids_of(other) != ids_of(result)) any_differs = true;
  }
  CHECK(any_differs);

  // Per-task sampling does not depend on which other tasks are present.
  std::vector<Demonstration> gsm_only(kept.begin(), kept.begin() + 7);
  ExportResult isolated = balance_and_export(gsm_only, caps, 11, dir / "demos4.jsonl");
  CHECK(ids_of(isolated) == ids_of(result));
}

TEST_CASE("demo manifest records the export") {
  testutil::TempDir dir;
  std::vector<Demonstration> kept = {kept_demo(
      gsm_record("g0", "sum?", Decimal(3)), full_trace("g0", "The answer is 3."))};
  std::map<std::string, size_t> caps = {{"GSM8K", 800}};
  ExportResult result = balance_and_export(kept, caps, 5, dir / "demos.jsonl");
  result.stats.generated = 1;
  result.stats.exact_pass = 1;
  result.stats.step_pass = 1;

  write_demo_manifest(dir / "demo_manifest.json", caps, 5, result.stats, result);
  Json manifest = Json::parse(read_text_file(dir / "demo_manifest.json"));
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("caps").at("GSM8K") == 800);
  CHECK(manifest.at("rows") == 1);
  CHECK(manifest.at("export_file") == "demos.jsonl");
  CHECK(manifest.at("export_sha256") == result.export_sha256);
  CHECK(manifest.at("stats").at("exported") == 1);
  CHECK(manifest.at("stats").at("exported_per_task").at("GSM8K") == 1);
}

TEST_CASE("default demonstration caps") {
  const auto& caps = default_demo_caps();
  CHECK(caps.at("AQuA") == 1000);
  CHECK(caps.at("GSM8K") == 800);
  CHECK(caps.at("OlyBench") == 250);
  CHECK(caps.at("DROP") == 350);
  CHECK(caps.size() == 4);
}
