#include <gtest/gtest.h>

#include <array>
#include <set>

#include "asl/rng.hpp"

namespace {

TEST(Mix64, MatchesSplitMix64FirstOutput) {
  // SplitMix64 seeded with 0 emits 0xE220A8397B1DCDAF first.
  EXPECT_EQ(asl::mix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(CounterRng, SameKeySameSequence) {
  asl::CounterRng a(42, {1, 2});
  asl::CounterRng b(42, {1, 2});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, PathsAndSeedsGiveDifferentStreams) {
  asl::CounterRng a(42, {1, 2});
  asl::CounterRng b(42, {2, 1});
  asl::CounterRng c(43, {1, 2});
  EXPECT_NE(a.key(), b.key());
  EXPECT_NE(a.key(), c.key());
}

TEST(CounterRng, SplitIgnoresParentDraws) {
  asl::CounterRng a(7);
  const auto before = a.split(3);
  for (int i = 0; i < 10; ++i) a();
  auto after = a.split(3);
  auto b2 = before;
  EXPECT_EQ(b2(), after());
}

TEST(CounterRng, SplitEqualsPathConstructor) {
  auto x = asl::CounterRng(9, {4}).split(5);
  asl::CounterRng y(9, {4, 5});
  EXPECT_EQ(x(), y());
}

TEST(CounterRng, NthOutputIsPureFunctionOfCounter) {
  asl::CounterRng a(5);
  const auto key = a.key();
  a();
  a();
  EXPECT_EQ(a.counter(), 2u);
  EXPECT_EQ(a(), asl::mix64(key + 2 * asl::kGoldenGamma));
}

TEST(CounterRng, UniformBelowStaysInRangeAndCoversIt) {
  asl::CounterRng r(11);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.uniform_below(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(r.uniform_below(0), 0u);
  EXPECT_EQ(r.uniform_below(1), 0u);
}

TEST(CounterRng, UniformIntIsClosed) {
  asl::CounterRng r(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(CounterRng, Uniform01InHalfOpenUnitInterval) {
  asl::CounterRng r(8);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(CounterRng, BernoulliEdges) {
  asl::CounterRng r(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(r.bernoulli(0.0));
    EXPECT_TRUE(r.bernoulli(1.0));
  }
}

}  // namespace
