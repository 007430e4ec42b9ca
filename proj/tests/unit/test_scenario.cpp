#include <gtest/gtest.h>

#include "scd/scd.hpp"

using namespace scd;

namespace {

ScenarioError parse_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e;
  }
  throw std::runtime_error("scenario parsed");
}

}  // namespace

TEST(Scenario, SyntaxErrorReportsLine) {
  auto e = parse_error("{\n  \"n\": 3,\n  \"t\": 0,\n  oops\n}");
  EXPECT_EQ(e.line(), 4u);
}

TEST(Scenario, BadProcessNamesField) {
  auto e = parse_error(R"({"n":2,"t":0,"seed":1,"delay":{"bounded":10},
    "workload":[{"proc":1,"op":"broadcast"},{"proc":3,"op":"broadcast"}]})");
  EXPECT_EQ(e.field(), "workload[1].proc");
}

TEST(Scenario, OpMustFitObject) {
  auto e = parse_error(R"({"n":2,"t":0,"seed":1,"delay":{"bounded":10},"object":"counter",
    "workload":[{"proc":1,"op":"write","args":[1,2]}]})");
  EXPECT_EQ(e.field(), "workload[0].op");
}

TEST(Scenario, WriteRegisterChecked) {
  auto e = parse_error(R"({"n":2,"t":0,"seed":1,"delay":{"bounded":10},"object":"snapshot",
    "workload":[{"proc":1,"op":"write","args":[3,2]}]})");
  EXPECT_EQ(e.field(), "workload[0].args");
}

TEST(Scenario, TooManyCrashes) {
  auto e = parse_error(R"({"n":3,"t":0,"seed":1,"delay":{"bounded":10},
    "crashes":[{"proc":1,"time":0}],"workload":[]})");
  EXPECT_EQ(e.field(), "config");
}

TEST(Scenario, UnknownCheck) {
  auto e = parse_error(R"({"n":1,"t":0,"seed":1,"delay":{"bounded":10},"checks":["speed"],"workload":[]})");
  EXPECT_EQ(e.field(), "checks");
}

TEST(Scenario, ShippedScenariosLoad) {
  for (const char* name : {"example-pattern.json", "basic-broadcast.json", "resilience-starvation.json",
                           "resilience-complete.json", "sc-counter-stale-read.json"}) {
    EXPECT_NO_THROW(load_scenario(std::string(SCD_SOURCE_DIR) + "/scenarios/" + name)) << name;
  }
}

TEST(Scenario, StarvationBeyondResilience) {
  auto s = load_scenario(SCD_SOURCE_DIR "/scenarios/resilience-starvation.json");
  EXPECT_TRUE(s.beyond_resilience());
  auto out = run_scenario(s);
  const Verdict* v = find_verdict(out.verdicts, "expected-starvation");
  ASSERT_NE(v, nullptr);
  EXPECT_TRUE(v->passed());
  EXPECT_NE(v->note.find("EXPECTED-STARVATION"), std::string::npos);
  for (const auto& x : out.verdicts) EXPECT_NE(x.outcome, Outcome::fail) << x.property;
}

TEST(Metrics, StableAcrossTraceReload) {
  SweepParams params;
  params.n = 4;
  params.ops = 8;
  params.object = ObjectKind::snapshot;
  auto trace = run_scenario(random_scenario(11, params)).trace;
  auto reloaded = trace_from_string(trace_to_string(trace));
  EXPECT_EQ(to_ojson(report_metrics(trace)).dump(), to_ojson(report_metrics(reloaded)).dump());
}

TEST(Metrics, SnapshotCosts) {
  auto out = run_scenario(parse_scenario(R"({"n":3,"t":0,"seed":1,"delay":{"bounded":10},"object":"snapshot",
    "workload":[{"time":0,"proc":1,"op":"write","args":[1,4]},{"time":0,"proc":2,"op":"snapshot"}]})"));
  auto m = report_metrics(out.trace);
  ASSERT_EQ(m.operations.size(), 2u);
  for (const auto& op : m.operations) {
    EXPECT_EQ(op.scd_broadcasts, op.name == "write" ? 2u : 1u) << op.name;
  }
}
