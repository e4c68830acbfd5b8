#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include "urnfield/engine.hpp"
#include "urnfield/equilibrium.hpp"
#include "urnfield/metrics.hpp"

using namespace urnfield;

namespace {

std::shared_ptr<const Topology> full_graph(int n) {
  TopologySpec s;
  s.n = n;
  return std::make_shared<const Topology>(s);
}

UrnState state_of(std::vector<Load> loads) {
  const Load total = std::accumulate(loads.begin(), loads.end(), Load{0});
  return {std::move(loads), total};
}

double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

SimConfig basic_config(int n, PolicySpec policy, double beta, double horizon, std::uint64_t seed) {
  SimConfig c;
  c.topology.n = n;
  c.policy = std::move(policy);
  c.beta = beta;
  c.horizon = horizon;
  c.seed = seed;
  if (horizon > 0.0) c.record_grid = uniform_grid(horizon, horizon / 10);
  return c;
}

// Fires one event from `start` for many seeds; tallies the load that lands
// on urn index 1 whenever urn index `fired` was chosen.
std::map<Load, int> first_event_tally(const PolicySpec& policy, std::vector<Load> start, int fired, int trials) {
  const auto topo = full_graph(static_cast<int>(start.size()));
  std::map<Load, int> tally;
  for (int s = 0; s < trials; ++s) {
    Simulator sim(topo, policy, state_of(start), derive_seed(77, static_cast<std::uint64_t>(s)));
    const StepResult r = sim.step();
    if (r.urn != fired) continue;
    EXPECT_EQ(sim.state().loads[fired], 0);
    ++tally[sim.state().loads[fired == 0 ? 1 : 0]];
  }
  return tally;
}

}  // namespace

TEST(Init, BalancedDivisible) {
  SplitMix64 rng(1);
  const auto s = init_state({InitKind::BalancedRotated, {}}, 4, 8, rng);
  EXPECT_EQ(s.loads, (std::vector<Load>{2, 2, 2, 2}));
  EXPECT_EQ(s.sum(), 8);
}

TEST(Init, BalancedRemainderIsContiguousBlock) {
  SplitMix64 rng(5);
  const auto s = init_state({InitKind::BalancedRotated, {}}, 10, 23, rng);
  EXPECT_EQ(s.sum(), 23);
  int heavy = 0;
  for (Load l : s.loads) {
    EXPECT_TRUE(l == 2 || l == 3);
    heavy += l == 3;
  }
  EXPECT_EQ(heavy, 3);
}

TEST(Init, MultinomialSingleBallIsFair) {
  int first = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_seed(3, static_cast<std::uint64_t>(t)));
    first += init_state({InitKind::MultinomialUniform, {}}, 2, 1, rng).loads[0];
  }
  EXPECT_NEAR(first, trials / 2, 4 * std::sqrt(trials * 0.25));
}

TEST(Init, MultinomialMarginalIsBinomial) {
  std::vector<double> counts(40, 0.0);
  for (int t = 0; t < 10000; ++t) {
    SplitMix64 rng(derive_seed(4, static_cast<std::uint64_t>(t)));
    const auto s = init_state({InitKind::MultinomialUniform, {}}, 100, 200, rng);
    for (Load l : s.loads) counts[static_cast<std::size_t>(l)] += 1.0;
  }
  std::vector<double> exact(40);
  for (int k = 0; k < 40; ++k) exact[k] = binomial_pmf(200, k, 0.01);
  EXPECT_LT(tv(Pmf::from_weights(counts), Pmf::from_weights(exact)), 0.02);
}

TEST(Init, ExplicitLoadsMustSumToTotal) {
  SplitMix64 rng(1);
  EXPECT_THROW(init_state({InitKind::ExplicitLoads, {1, 2, 3}}, 3, 7, rng), ConfigError);
  EXPECT_EQ(init_state({InitKind::ExplicitLoads, {1, 2, 3}}, 3, 6, rng).loads, (std::vector<Load>{1, 2, 3}));
}

TEST(Step, RandomPolicySplitsBinomially) {
  const auto tally = first_event_tally(PolicySpec::random(), {3, 0, 0}, 0, 100000);
  int fired = 0;
  for (const auto& [k, c] : tally) fired += c;
  ASSERT_GT(fired, 30000);
  for (int k = 0; k <= 3; ++k) {
    const double p = binomial_pmf(3, k, 0.5);
    const double got = tally.count(k) ? tally.at(k) : 0;
    EXPECT_NEAR(got, fired * p, 3 * std::sqrt(fired * p * (1 - p)) + 1) << "k=" << k;
  }
}

TEST(Step, PowerOfDTieAtZeroSplitsBinomially) {
  // Urn index 1 holds 5 balls; both neighbors tie at 0.
  const auto topo = full_graph(3);
  std::map<Load, int> tally;
  int fired = 0;
  for (int s = 0; s < 60000; ++s) {
    Simulator sim(topo, PolicySpec::power_of_d(2), state_of({0, 5, 0}), derive_seed(91, static_cast<std::uint64_t>(s)));
    if (sim.step().urn != 1) continue;
    ++fired;
    EXPECT_EQ(sim.state().loads[1], 0);
    ++tally[sim.state().loads[0]];
  }
  for (int k = 0; k <= 5; ++k) {
    const double p = binomial_pmf(5, k, 0.5);
    const double got = tally.count(k) ? tally.at(k) : 0;
    EXPECT_NEAR(got, fired * p, 3 * std::sqrt(fired * p * (1 - p)) + 1) << "k=" << k;
  }
}

TEST(Step, EmptyUrnFiringLeavesStateAndAdvancesTime) {
  const auto topo = full_graph(3);
  for (int s = 0; s < 50; ++s) {
    Simulator sim(topo, PolicySpec::random(), state_of({0, 4, 0}), static_cast<std::uint64_t>(s));
    const double t0 = sim.next_event_time();
    const auto r = sim.step();
    EXPECT_DOUBLE_EQ(sim.time(), t0);
    EXPECT_GT(r.dt, 0.0);
    if (r.urn != 1) {
      EXPECT_EQ(r.moved, 0);
      EXPECT_EQ(sim.state().loads, (std::vector<Load>{0, 4, 0}));
    }
  }
}

TEST(Step, ConservesBallsAndHistogram) {
  TopologySpec spec;
  spec.kind = TopologyKind::Torus;
  spec.n = 50;
  spec.alpha = 0.1;
  const auto topo = std::make_shared<const Topology>(spec);
  SplitMix64 rng(2);
  for (const auto& pol : {PolicySpec::random(), PolicySpec::power_of_d(3),
                          PolicySpec::weighted(WeightTable({3.0, 1.0}, 0.5))}) {
    Simulator sim(topo, pol, init_state({InitKind::MultinomialUniform, {}}, 50, 150, rng), 8);
    for (int e = 0; e < 20000; ++e) {
      const auto r = sim.step();
      ASSERT_EQ(sim.state().sum(), 150);
      ASSERT_EQ(sim.state().loads[r.urn], 0);
    }
    const auto h = sim.histogram();
    std::vector<std::uint64_t> manual(h.size(), 0);
    for (Load l : sim.state().loads) ++manual[static_cast<std::size_t>(l)];
    EXPECT_TRUE(std::equal(h.begin(), h.end(), manual.begin()));
  }
}

TEST(Step, InterEventTimesAreExponentialWithRateN) {
  Simulator sim(full_graph(20), PolicySpec::random(), state_of(std::vector<Load>(20, 1)), 4);
  double s = 0.0;
  const int n = 100000;
  for (int e = 0; e < n; ++e) s += sim.step().dt;
  EXPECT_NEAR(s / n, 1.0 / 20, 4 * (1.0 / 20) / std::sqrt(n));
}

TEST(Run, HorizonZeroRecordsInitialState) {
  auto c = basic_config(10, PolicySpec::random(), 2.0, 0.0, 1);
  c.record_grid.clear();
  const auto rec = run(c);
  ASSERT_EQ(rec.times.size(), 1u);
  EXPECT_EQ(rec.event_count, 0u);
  EXPECT_EQ(rec.global_empirical[0], Pmf::dirac(2));
}

TEST(Run, DeterministicForSeed) {
  const auto c = basic_config(40, PolicySpec::power_of_d(2), 3.0, 5.0, 123);
  EXPECT_EQ(run(c), run(c));
  auto other = c;
  other.seed = 124;
  EXPECT_NE(run(c).event_count + 1000000 * run(c).local_mean.back(),
            run(other).event_count + 1000000 * run(other).local_mean.back());
}

// A grid time equal to an event time sees the state after that event.
TEST(Run, GridSamplingIncludesEventAtGridTime) {
  auto c = basic_config(6, PolicySpec::random(), 3.0, 10.0, 17);
  const auto topo = std::make_shared<const Topology>(c.topology);
  SplitMix64 init_rng(derive_seed(c.seed, 0));
  Simulator probe(topo, c.policy, init_state(c.init, 6, c.total_balls(), init_rng), derive_seed(c.seed, 1));
  std::vector<double> events;
  std::vector<Pmf> after;
  for (int e = 0; e < 3; ++e) {
    probe.step();
    events.push_back(probe.time());
    after.push_back(probe.global_empirical());
  }
  c.record_grid = {0.0, events[0], events[2]};
  const auto rec = run(c, topo);
  EXPECT_EQ(rec.global_empirical[1], after[0]);
  EXPECT_EQ(rec.global_empirical[2], after[2]);
}

TEST(Run, ConfigErrors) {
  auto c = basic_config(4, PolicySpec::power_of_d(5), 2.0, 1.0, 1);
  EXPECT_THROW(run(c), ConfigError);
  c.policy = PolicySpec::random();
  c.observed_center = 5;
  EXPECT_THROW(run(c), ConfigError);
  c.observed_center = 1;
  c.record_grid = {0.5, 0.2};
  EXPECT_THROW(run(c), ConfigError);
  c.record_grid = {0.0, 2.0};
  EXPECT_THROW(run(c), ConfigError);
  c.record_grid.clear();
  c.average_from = 1.0;
  EXPECT_THROW(run(c), ConfigError);
  c.topology.n = 1;
  c.average_from.reset();
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Run, LocalEmpiricalCoversNeighborhood) {
  auto c = basic_config(30, PolicySpec::random(), 2.0, 3.0, 5);
  c.topology.kind = TopologyKind::Torus;
  c.topology.alpha = 0.2;
  c.observed_center = 7;
  const auto rec = run(c);
  EXPECT_EQ(rec.h, 12);
  for (const auto& p : rec.local_empirical) {
    // Every atom is a multiple of 1/h.
    for (double x : p.probs()) EXPECT_NEAR(x * 12, std::round(x * 12), 1e-12);
  }
}

TEST(Run, TimeAverageApproachesGeometric) {
  auto c = basic_config(100, PolicySpec::random(), 2.0, 100.0, 9);
  c.average_from = 50.0;
  const auto rec = run(c);
  ASSERT_TRUE(rec.time_averaged_global);
  EXPECT_NEAR(rec.time_averaged_global->mean(), 2.0, 1e-9);
  EXPECT_LT(tv(*rec.time_averaged_global, invariant_random(2.0)), 0.08);
}

TEST(Ensemble, ParallelMatchesSerial) {
  auto c = basic_config(30, PolicySpec::power_of_d(2), 2.0, 4.0, 31);
  c.average_from = 2.0;
  const auto serial = run_ensemble_serial(c, 9);
  for (int threads : {1, 2, 4}) EXPECT_EQ(run_ensemble(c, 9, threads), serial) << threads << " threads";
}

TEST(Ensemble, SingleReplicaIsRunWithReplicaSeed) {
  const auto c = basic_config(20, PolicySpec::random(), 1.5, 3.0, 8);
  auto direct = c;
  direct.seed = replica_seed(c.seed, 0);
  EXPECT_EQ(run_ensemble(c, 1).front(), run(direct));
}

TEST(Ensemble, GlobalMeanIsExactlyConserved) {
  const auto c = basic_config(25, PolicySpec::power_of_d(2), 2.0, 5.0, 10);
  const auto recs = run_ensemble(c, 30);
  for (std::size_t t = 0; t < c.record_grid.size(); ++t) {
    double mean = 0.0;
    for (const auto& r : recs) mean += r.global_empirical[t].mean();
    EXPECT_NEAR(mean / 30, 2.0, 1e-12);
  }
}

TEST(Ensemble, RejectsNonPositiveReplicas) {
  const auto c = basic_config(10, PolicySpec::random(), 1.0, 1.0, 1);
  EXPECT_THROW(run_ensemble(c, 0), ConfigError);
}

TEST(Grid, EndsExactlyAtHorizon) {
  const auto g = uniform_grid(1.0, 0.1);
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(uniform_grid(1.0, 0.3).back(), 1.0);
  EXPECT_EQ(uniform_grid(0.0, 0.3), std::vector<double>{0.0});
}
