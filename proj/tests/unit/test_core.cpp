#include <gtest/gtest.h>

#include "scd/checkers/scd_properties.hpp"
#include "scd/core.hpp"
#include "scd/generators.hpp"
#include "scd/trace_io.hpp"

using namespace scd;

TEST(Timestamp, Irreflexive) {
  EXPECT_FALSE(ts_less({0, 1}, {0, 1}));
}

TEST(Timestamp, DateDominates) {
  EXPECT_TRUE(ts_less({1, 3}, {2, 1}));
  EXPECT_FALSE(ts_less({2, 1}, {1, 3}));
}

TEST(Timestamp, ProcBreaksTies) {
  EXPECT_TRUE(ts_less({2, 1}, {2, 3}));
  EXPECT_FALSE(ts_less({2, 3}, {2, 1}));
}

TEST(Timestamp, StrictTotalOrderExhaustive) {
  std::vector<Timestamp> all;
  for (std::uint64_t d = 0; d <= 3; ++d) {
    for (int p = 1; p <= 3; ++p) all.push_back({d, p});
  }
  for (const auto& a : all) {
    for (const auto& b : all) {
      int holds = int(ts_less(a, b)) + int(ts_less(b, a)) + int(a == b);
      EXPECT_EQ(holds, 1) << a.date << "," << a.proc << " vs " << b.date << "," << b.proc;
      for (const auto& c : all) {
        if (ts_less(a, b) && ts_less(b, c)) {
          EXPECT_TRUE(ts_less(a, c));
        }
      }
    }
  }
}

TEST(Timestamp, PlaceholderBelowRealProcesses) {
  EXPECT_TRUE(ts_less({0, 0}, {0, 1}));
  EXPECT_TRUE(ts_less({0, 0}, {1, 1}));
}

TEST(TsaLeq, Reflexive) {
  std::vector<Timestamp> a{{1, 2}, {0, 0}, {3, 1}};
  EXPECT_TRUE(tsa_leq(a, a));
}

TEST(TsaLeq, SingleEntry) {
  std::vector<Timestamp> a{{0, 1}}, b{{1, 1}};
  EXPECT_TRUE(tsa_leq(a, b));
  EXPECT_FALSE(tsa_leq(b, a));
}

TEST(TsaLeq, IncomparablePair) {
  std::vector<Timestamp> a{{1, 1}, {0, 2}}, b{{0, 2}, {1, 1}};
  EXPECT_FALSE(tsa_leq(a, b));
  EXPECT_FALSE(tsa_leq(b, a));
}

TEST(TsaLeq, LengthMismatchIsContractViolation) {
  std::vector<Timestamp> a{{1, 1}}, b{{1, 1}, {2, 2}};
  EXPECT_THROW(tsa_leq(a, b), ContractViolation);
}

TEST(MessageSet, NormalizeSortsAndDedups) {
  MessageSet s{{{ProcessId{2}, 1}, "b"}, {{ProcessId{1}, 4}, "a"}, {{ProcessId{2}, 1}, "b"}};
  normalize(s);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].id, (MessageId{ProcessId{1}, 4}));
  EXPECT_TRUE(contains(s, MessageId{ProcessId{2}, 1}));
  EXPECT_FALSE(contains(s, MessageId{ProcessId{2}, 2}));
}

namespace {

// p1 of the positive example in the broadcast definition section.
Trace example_trace() {
  return make_delivery_trace(3, {{{1, 2}, {3, 4, 5}, {6}, {7, 8}},
                                 {{1}, {3, 2}, {6, 4, 5}, {7}, {8}},
                                 {{3, 1, 2}, {6, 4, 5}, {7}, {8}}});
}

std::set<MessageId> ids(std::initializer_list<int> ks, int n = 3) {
  std::set<MessageId> out;
  for (int k : ks) out.insert(MessageId{ProcessId{(k - 1) % n + 1}, static_cast<SeqNum>(k)});
  return out;
}

}  // namespace

TEST(PrefixUnion, EmptyPrefix) {
  EXPECT_TRUE(delivered_prefix_union(example_trace(), ProcessId{1}, 0).empty());
}

TEST(PrefixUnion, ExampleTwoSets) {
  EXPECT_EQ(delivered_prefix_union(example_trace(), ProcessId{1}, 2), ids({1, 2, 3, 4, 5}));
}

TEST(PrefixUnion, TooLongIsError) {
  EXPECT_THROW(delivered_prefix_union(example_trace(), ProcessId{1}, 5), ContractViolation);
}

TEST(PrefixUnion, MatchesRescanAndIsMonotone) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SweepParams params;
    params.n = 4;
    params.ops = 8;
    auto outcome = run_scenario(random_scenario(seed, params));
    for (int p = 1; p <= 4; ++p) {
      auto sets = delivered_sets(outcome.trace, ProcessId{p}, "scd");
      std::set<MessageId> expected;
      std::set<MessageId> prev;
      for (std::size_t x = 0; x <= sets.size(); ++x) {
        if (x > 0) {
          for (const auto& m : sets[x - 1]) expected.insert(m.id);
        }
        auto got = delivered_prefix_union(outcome.trace, ProcessId{p}, x);
        EXPECT_EQ(got, expected);
        EXPECT_TRUE(std::includes(got.begin(), got.end(), prev.begin(), prev.end()));
        prev = got;
      }
    }
  }
}

TEST(TraceIo, RoundTripIsByteIdentical) {
  SweepParams params;
  params.n = 3;
  params.ops = 5;
  auto trace = run_scenario(random_scenario(7, params)).trace;
  auto text = trace_to_string(trace);
  auto again = trace_to_string(trace_from_string(text));
  EXPECT_EQ(text, again);
}

TEST(TraceIo, ReportsBadLine) {
  std::string text = std::string("{\"format\":\"scd-trace/1\",\"config\":{\"n\":1,\"t\":0,\"seed\":1,") +
                     "\"delay\":{\"bounded\":10}},\"end_time\":0,\"quiescent\":true}\n{oops\n";
  try {
    trace_from_string(text);
    FAIL() << "expected TraceFormatError";
  } catch (const TraceFormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(TraceIo, MissingHeaderRejected) {
  EXPECT_THROW(trace_from_string("{\"time\":0}\n"), TraceFormatError);
}
