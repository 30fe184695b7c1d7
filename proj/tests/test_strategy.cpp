#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "quasar/strategy.hpp"

using namespace quasar;

TEST_CASE("ids round-trip through parse_strategy_id") {
  for (const auto& variant :
       {StrategyVariant::baseline(), StrategyVariant::cot(), StrategyVariant::quasar(),
        StrategyVariant::quasar_without({1, 2}), StrategyVariant::quasar_without({3}),
        StrategyVariant::quasar_shuffled(42)}) {
    StrategyVariant parsed = parse_strategy_id(variant.id());
    CHECK(parsed.id() == variant.id());
    CHECK(parsed.kind == variant.kind);
    CHECK(parsed.omitted_steps == variant.omitted_steps);
    CHECK(parsed.step_order == variant.step_order);
  }
}

TEST_CASE("expected id strings") {
  CHECK(StrategyVariant::baseline().id() == "baseline");
  CHECK(StrategyVariant::cot().id() == "cot");
  CHECK(StrategyVariant::quasar().id() == "quasar");
  CHECK(StrategyVariant::quasar_without({1, 2}).id() == "quasar_wo12");
  CHECK(StrategyVariant::quasar_shuffled(42).id() == "quasar_shuf42");
}

TEST_CASE("labels match the reporting convention") {
  CHECK(StrategyVariant::quasar().label() == "QuaSAR");
  CHECK(StrategyVariant::cot().label() == "CoT");
  CHECK(StrategyVariant::quasar_without({2}).label() == "w/o(2)");
  CHECK(StrategyVariant::quasar_without({1, 2}).label() == "w/o(1-2)");
  CHECK(StrategyVariant::quasar_without({1, 3}).label() == "w/o(1,3)");
  CHECK(StrategyVariant::quasar_shuffled(42).label() == "shuffled(seed=42)");
}

TEST_CASE("retained steps drop omissions but keep order") {
  auto variant = StrategyVariant::quasar_without({2, 3});
  CHECK(variant.retained_steps() == std::vector<int>{1, 4});
  CHECK(StrategyVariant::quasar().retained_steps() == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("shuffled variants permute whole steps deterministically") {
  auto a = StrategyVariant::quasar_shuffled(42);
  auto b = StrategyVariant::quasar_shuffled(42);
  CHECK(a.step_order == b.step_order);
  auto sorted = a.step_order;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("validation rejects inconsistent variants") {
  StrategyVariant bad = StrategyVariant::quasar();
  bad.step_order = {1, 2, 3};  // lost a step
  CHECK_THROWS(bad.validate());

  StrategyVariant dup = StrategyVariant::quasar();
  dup.step_order = {1, 2, 2, 4};
  CHECK_THROWS(dup.validate());

  CHECK_THROWS(StrategyVariant::quasar_without({0}));
  CHECK_THROWS(StrategyVariant::quasar_without({5}));
  CHECK_THROWS(StrategyVariant::quasar_without({1, 2, 3, 4}));
}

TEST_CASE("ablation grid has the full protocol and six omissions") {
  auto variants = ablation_variants();
  REQUIRE(variants.size() == 7);
  CHECK(variants.front().id() == "quasar");
  std::set<std::string> ids;
  for (const auto& v : variants) ids.insert(v.id());
  CHECK(ids == std::set<std::string>{"quasar", "quasar_wo1", "quasar_wo2", "quasar_wo3",
                                     "quasar_wo4", "quasar_wo12", "quasar_wo34"});
}

TEST_CASE("parse_strategy_id rejects junk") {
  CHECK_THROWS(parse_strategy_id("quasar_wo"));
  CHECK_THROWS(parse_strategy_id("quasar_wo5"));
  CHECK_THROWS(parse_strategy_id("quasar_shuf"));
  CHECK_THROWS(parse_strategy_id("mystery"));
}
