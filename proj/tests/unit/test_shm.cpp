#include <gtest/gtest.h>

#include "scd/scd.hpp"

using namespace scd;

namespace {

Scenario shm_scenario(int n, std::uint64_t seed, int per_process) {
  Scenario s;
  s.config.n = n;
  s.config.seed = seed;
  s.protocol = Protocol::shm_scd;
  for (int p = 1; p <= n; ++p) {
    for (int k = 0; k < per_process; ++k) {
      s.workload.push_back(WorkloadItem{static_cast<Time>(k * 7 + p), ProcessId{p}, "broadcast", {}});
    }
  }
  return s;
}

}  // namespace

TEST(ShmScd, SingleProcess) {
  auto out = run_scenario(shm_scenario(1, 1, 3));
  EXPECT_TRUE(all_passed(out.verdicts));
  std::size_t delivered = 0;
  for (const auto& set : delivered_sets(out.trace, ProcessId{1}, "shm")) delivered += set.size();
  EXPECT_EQ(delivered, 3u);
}

TEST(ShmScd, RunsDrainToQuiescence) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto out = run_scenario(shm_scenario(4, seed, 3));
    EXPECT_TRUE(out.trace.quiescent) << "seed " << seed;
    for (const auto& v : out.verdicts) EXPECT_TRUE(v.passed()) << seed << " " << v.property;
  }
}

TEST(ShmScd, CatchupReplaysEarlierSets) {
  // p2 only broadcasts after p1's messages are delivered, so p2 learns them
  // through SETSEQ and delivers them in p1's order before its own.
  Scenario s = shm_scenario(2, 3, 0);
  s.workload = {WorkloadItem{0, ProcessId{1}, "broadcast", "a"},
                WorkloadItem{0, ProcessId{1}, "broadcast", "b"},
                WorkloadItem{400, ProcessId{2}, "broadcast", "c"}};
  auto out = run_scenario(s);
  ASSERT_TRUE(all_passed(out.verdicts));
  auto p1 = delivered_sets(out.trace, ProcessId{1}, "shm");
  auto p2 = delivered_sets(out.trace, ProcessId{2}, "shm");
  ASSERT_GE(p2.size(), 2u);
  EXPECT_EQ(p2[0], p1[0]);
  EXPECT_EQ(p2[1], p1[1]);
}

TEST(ShmScd, WithoutBackgroundTaskTerminationTwoCanFail) {
  bool broke = false;
  for (std::uint64_t seed = 1; seed <= 20 && !broke; ++seed) {
    Scenario s = shm_scenario(3, seed, 0);
    s.config.background_ticks = false;
    s.workload = {WorkloadItem{0, ProcessId{1}, "broadcast", "a"}};
    auto out = run_scenario(s);
    const Verdict* t2 = find_verdict(out.verdicts, "Termination-2");
    ASSERT_NE(t2, nullptr);
    broke = t2->outcome == Outcome::fail;
  }
  EXPECT_TRUE(broke);
}

TEST(ShmScd, RoundTripOverMessagePassing) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = shm_scenario(3, seed, 2);
    s.protocol = Protocol::shm_scd_roundtrip;
    auto out = run_scenario(s);
    EXPECT_TRUE(out.trace.quiescent) << "seed " << seed;
    for (const auto& v : out.verdicts) EXPECT_TRUE(v.passed()) << seed << " " << v.property;
  }
}
