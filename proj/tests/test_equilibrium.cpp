#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "urnfield/equilibrium.hpp"
#include "urnfield/metrics.hpp"

using namespace urnfield;

namespace {

Pmf geometric(double beta, std::size_t count = 4000) {
  const double q = beta / (1 + beta);
  std::vector<double> w(count);
  for (std::size_t k = 0; k < count; ++k) w[k] = (1 - q) * std::pow(q, static_cast<double>(k));
  return Pmf::from_weights(w);
}

}  // namespace

TEST(InvariantRandom, GeometricValues) {
  const Pmf p = invariant_random(1.0);
  EXPECT_NEAR(p[0], 0.5, 1e-13);
  EXPECT_NEAR(p[1], 0.25, 1e-13);
  EXPECT_GT(invariant_random(1e-3)[0], 0.998);
  for (double beta : {0.5, 2.0, 150.0}) EXPECT_NEAR(invariant_random(beta).mean(), beta, 1e-10) << beta;
}

TEST(InvariantWeighted, ConstantTableGivesGeometric) {
  const auto eq = invariant_weighted(WeightTable({}, 3.0), 2.0);
  EXPECT_NEAR(eq.gamma, 3.0, 1e-12);
  EXPECT_LT(tv(eq.pmf, geometric(2.0)), 1e-12);
}

TEST(InvariantWeighted, IsFixedPointWithMeanBeta) {
  const WeightTable w({2.0}, 1.0);
  const auto pol = PolicySpec::weighted(w);
  const auto eq = invariant_weighted(w, 1.0);
  EXPECT_GT(eq.gamma, 1.0);
  EXPECT_LT(eq.gamma, 2.0);
  EXPECT_LT(eq.residual, 1e-12);
  EXPECT_NEAR(eq.pmf.mean(), 1.0, 1e-8);
  EXPECT_LT(tv(apply_fixed_point_map(pol, 1.0, eq.pmf), eq.pmf), 1e-10);
  EXPECT_LT(balance_residual(pol, 1.0, eq.pmf), 1e-10);
}

TEST(InvariantWeighted, MatchesFixedPointIteration) {
  const WeightTable w({0.5, 3.0, 1.0, 2.0}, 1.5);
  const auto pol = PolicySpec::weighted(w);
  for (double beta : {0.7, 3.0}) {
    const auto eq = invariant_weighted(w, beta);
    const auto fp = fixed_point_iterate(pol, beta, invariant_random(beta));
    EXPECT_LT(tv(fp.pmf, eq.pmf), 1e-10);
    EXPECT_NEAR(eq.pmf.mean(), beta, 1e-8);
  }
}

TEST(InvariantPowerOfD, GoldenRatioCase) {
  const auto eq = invariant_power_of_d(1.0, 2);
  EXPECT_NEAR(eq.xi.xi[1], (std::sqrt(5.0) - 1) / 2, 1e-14);
}

TEST(InvariantPowerOfD, XiMonotoneAndSumsToBeta) {
  for (double beta : {1.0, 10.0, 150.0}) {
    for (int d : {2, 3}) {
      const auto eq = invariant_power_of_d(beta, d);
      const auto& xi = eq.xi.xi;
      EXPECT_EQ(xi[0], 1.0);
      for (std::size_t n = 1; n < xi.size(); ++n) EXPECT_LE(xi[n], xi[n - 1]);
      EXPECT_NEAR(eq.xi.tail_sum(), beta, 1e-8);
      EXPECT_LT(eq.xi.max_residual(), 1e-12);
      EXPECT_NEAR(eq.pmf.mean(), beta, 1e-8);
    }
  }
}

TEST(InvariantPowerOfD, NMaxCapsLength) {
  const auto eq = invariant_power_of_d(50.0, 2, 20);
  EXPECT_LE(eq.xi.xi.size(), 21u);
}

TEST(FixedPoint, RandomConvergesInOneStep) {
  const auto r = fixed_point_iterate(PolicySpec::random(), 2.0, Pmf::dirac(7), {1.0, 1e-13, 10});
  EXPECT_LE(r.iterations, 1u);
  EXPECT_LT(tv(r.pmf, geometric(2.0)), 1e-12);
}

TEST(FixedPoint, PowerOfDMatchesRecursion) {
  const auto pol = PolicySpec::power_of_d(2);
  const auto r = fixed_point_iterate(pol, 2.0, invariant_random(2.0));
  EXPECT_LT(tv(r.pmf, invariant_power_of_d(2.0, 2).pmf), 1e-10);
  EXPECT_LT(r.residual, 1e-13);
}

TEST(FixedPoint, LargeBetaStillConverges) {
  const auto pol = PolicySpec::power_of_d(3);
  const auto r = fixed_point_iterate(pol, 150.0, invariant_random(150.0));
  EXPECT_LT(tv(r.pmf, invariant_power_of_d(150.0, 3).pmf), 1e-10);
  EXPECT_GE(r.final_damping, 0.5 / 16);
}

TEST(FixedPoint, BudgetExhaustionReportsResidual) {
  try {
    fixed_point_iterate(PolicySpec::power_of_d(2), 10.0, Pmf::dirac(0), {0.01, 1e-13, 3});
    FAIL();
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.residual(), 1e-13);
  }
}

TEST(TailBound, Holds) {
  EXPECT_TRUE(geometric_tail_bound_check(invariant_random(2.0), 2.0, 1.0).holds);
  EXPECT_TRUE(geometric_tail_bound_check(Pmf::dirac(0), 2.0, 1.0).holds);
  const auto eq = invariant_power_of_d(1.0, 2);
  const auto rep = geometric_tail_bound_check(eq.pmf, 1.0, 2.0);
  EXPECT_TRUE(rep.holds);
  for (std::size_t k = 2; k < eq.xi.xi.size(); ++k) EXPECT_LT(eq.xi.xi[k], std::pow(2.0 / 3.0, k));
}

TEST(TailBound, DetectsViolation) {
  const auto rep = geometric_tail_bound_check(Pmf::dirac(5), 1.0, 1.0);
  EXPECT_FALSE(rep.holds);
  EXPECT_NEAR(rep.max_violation, 1.0 - std::pow(0.5, 5), 1e-15);
}

TEST(LimitLaw, UniformForTwoChoices) {
  const LimitLaw law(2);
  EXPECT_DOUBLE_EQ(law.support_edge(), 2.0);
  for (double x : {0.0, 0.3, 1.0, 1.7}) EXPECT_NEAR(law.survival(x), 1 - x / 2, 1e-15);
  EXPECT_EQ(law.survival(2.0), 0.0);
  EXPECT_EQ(law.survival(5.0), 0.0);
}

TEST(LimitLaw, ThreeChoices) {
  const LimitLaw law(3);
  EXPECT_NEAR(law.survival(1.0), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_EQ(law.survival(0.0), 1.0);
  EXPECT_EQ(law.survival(1.5), 0.0);
  const std::vector<double> one{1.0};
  EXPECT_LT(law.relation_residual(one), 1e-10);
  EXPECT_NEAR(law.from_uniform(0.0), 1.5, 1e-15);
  EXPECT_NEAR(law.from_uniform(1.0), 0.0, 1e-15);
}

TEST(LimitLaw, DefiningRelationOnGrid) {
  for (int d : {2, 3, 5}) {
    const LimitLaw law(d);
    std::vector<double> xs;
    for (int i = 0; i <= 40; ++i) xs.push_back(law.support_edge() * i / 40.0 * 1.05);
    EXPECT_LT(law.relation_residual(xs), 1e-10) << "d=" << d;
  }
  const std::vector<double> negative{-0.1};
  EXPECT_THROW(LimitLaw(2).relation_residual(negative), std::invalid_argument);
}

TEST(ScaledCdfGap, ShrinksWithBeta) {
  const double g10 = scaled_equilibrium_cdf_gap(10.0, 2);
  const double g50 = scaled_equilibrium_cdf_gap(50.0, 2);
  const double g150 = scaled_equilibrium_cdf_gap(150.0, 2);
  EXPECT_GT(g10, g50);
  EXPECT_GT(g50, g150);
  EXPECT_LE(g150, 0.02);
  EXPECT_GT(scaled_equilibrium_cdf_gap(0.1, 2), 0.5);
}
