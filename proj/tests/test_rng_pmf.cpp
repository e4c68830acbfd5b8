#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "urnfield/pmf.hpp"
#include "urnfield/rng.hpp"

using namespace urnfield;

TEST(Rng, SameSeedSameStream) {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DiscardSkipsAhead) {
  SplitMix64 a(7), b(7);
  for (int i = 0; i < 13; ++i) a();
  b.discard(13);
  EXPECT_EQ(a(), b());
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m)
    for (std::uint64_t r = 0; r < 50; ++r) seen.insert(derive_seed(m, r));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Rng, UniformBelowStaysInRangeAndCoversIt) {
  SplitMix64 rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = uniform_below(rng, 7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // 10000 expected per cell, sd ~ 93
  for (int c : counts) EXPECT_NEAR(c, 10000, 450);
}

TEST(Rng, ExponentialMean) {
  SplitMix64 rng(11);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += exponential(rng, 4.0);
  EXPECT_NEAR(s / n, 0.25, 4 * 0.25 / std::sqrt(n));
}

TEST(Pmf, RejectsBadInput) {
  EXPECT_THROW(Pmf({0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(Pmf({1.2, -0.2}), std::invalid_argument);
  EXPECT_THROW(Pmf({NAN, 1.0}), std::invalid_argument);
  EXPECT_THROW(Pmf::from_weights({0.0, 0.0}), std::invalid_argument);
}

TEST(Pmf, ClampsRoundoffAndTrimsZeros) {
  const Pmf p({0.5, 0.5, -1e-13, 0.0});
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_EQ(p[100], 0.0);
}

TEST(Pmf, MomentsAndTails) {
  const Pmf p({0.25, 0.25, 0.5});
  EXPECT_DOUBLE_EQ(p.mean(), 1.25);
  EXPECT_DOUBLE_EQ(p.survival(0), 1.0);
  EXPECT_DOUBLE_EQ(p.survival(2), 0.5);
  EXPECT_DOUBLE_EQ(p.survival(3), 0.0);
  EXPECT_DOUBLE_EQ(p.cdf(1), 0.5);
  EXPECT_DOUBLE_EQ(p.cdf(9), 1.0);
}

TEST(Pmf, EmpiricalAndCounts) {
  const std::vector<Load> loads{0, 2, 2, 1};
  const Pmf e = Pmf::empirical(loads);
  EXPECT_DOUBLE_EQ(e[0], 0.25);
  EXPECT_DOUBLE_EQ(e[1], 0.25);
  EXPECT_DOUBLE_EQ(e[2], 0.5);
  const std::vector<std::uint64_t> counts{1, 1, 2};
  EXPECT_EQ(Pmf::from_counts(counts), e);
  EXPECT_EQ(Pmf::dirac(3).size(), 4u);
  EXPECT_DOUBLE_EQ(Pmf::dirac(3)[3], 1.0);
}

TEST(Pmf, TrimmedDropsSmallTail) {
  const Pmf p({0.5, 0.5 - 2e-16, 1e-16, 1e-16});
  const Pmf t = p.trimmed(1e-15);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_NEAR(t.total(), 1.0, 1e-15);
}
