#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "urnfield/equilibrium.hpp"
#include "urnfield/experiments.hpp"

using namespace urnfield;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.name = "t";
  spec.seed = 4;
  spec.grid_step = 0.1;
  for (int n : {20, 60}) {
    SweepPoint p;
    p.topology.n = n;
    p.policy = PolicySpec::power_of_d(2);
    p.beta = 2.0;
    p.horizon = 2.0;
    p.replicas = 6;
    spec.sweep.push_back(p);
  }
  return spec;
}

}  // namespace

TEST(Experiments, InitialLaws) {
  const Pmf balanced = initial_law(InitKind::BalancedRotated, 2.0);
  EXPECT_EQ(balanced, Pmf::dirac(2));
  const Pmf split = initial_law(InitKind::BalancedRotated, 2.25);
  EXPECT_NEAR(split[2], 0.75, 1e-15);
  EXPECT_NEAR(split[3], 0.25, 1e-15);
  const Pmf poisson = initial_law(InitKind::MultinomialUniform, 2.0);
  EXPECT_NEAR(poisson.mean(), 2.0, 1e-10);
  EXPECT_NEAR(poisson[0], std::exp(-2.0), 1e-12);
  EXPECT_THROW(initial_law(InitKind::ExplicitLoads, 2.0), ConfigError);
}

TEST(Experiments, ValidateRejectsBadSpecs) {
  ExperimentSpec spec;
  EXPECT_THROW(validate(spec), ConfigError);
  spec = small_spec();
  spec.sweep[1].replicas = 0;
  EXPECT_THROW(validate(spec), ConfigError);
}

TEST(Experiments, ConvergenceIsReproducibleAndWellFormed) {
  const auto spec = small_spec();
  const auto a = mean_field_convergence(spec);
  const auto b = mean_field_convergence(spec);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].combined_mean, b[i].combined_mean);
    EXPECT_NEAR(a[i].combined_mean, a[i].tv_mean + a[i].mean_gap_mean, 1e-12);
    EXPECT_GE(a[i].tv_se, 0.0);
  }
  EXPECT_EQ(a[0].n, 20);
  EXPECT_EQ(a[1].h, 59);
  std::ostringstream out;
  write_convergence_csv(out, a);
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "n,h,topology,policy,beta,replicas,tv_mean,tv_se,mean_gap_mean,mean_gap_se,combined_mean,combined_se");
  for (const auto& r : rows) EXPECT_EQ(columns(r), 12u);
}

TEST(Experiments, ThreadCountDoesNotChangeResults) {
  auto spec = small_spec();
  spec.threads = 1;
  const auto one = mean_field_convergence(spec);
  spec.threads = 3;
  const auto three = mean_field_convergence(spec);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].combined_mean, three[i].combined_mean);
}

TEST(Experiments, StationaryRows) {
  auto spec = small_spec();
  for (auto& p : spec.sweep) p.horizon = 20.0;
  const auto rows = stationary_comparison(spec);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GT(r.tv_mean, 0.0);
    EXPECT_LT(r.tv_mean, 0.3);
  }
  std::ostringstream out;
  write_stationary_csv(out, rows);
  const auto text = lines(out.str());
  ASSERT_EQ(text.size(), 3u);
  for (const auto& l : text) EXPECT_EQ(columns(l), 9u);
}

TEST(Experiments, FiniteSupport) {
  const std::vector<double> betas{10.0, 50.0, 150.0};
  const auto result = finite_support_demo(betas, 2);
  ASSERT_EQ(result.summaries.size(), 3u);
  EXPECT_GT(result.summaries[0].gap, result.summaries[1].gap);
  EXPECT_GT(result.summaries[1].gap, result.summaries[2].gap);
  EXPECT_LT(result.summaries[2].mass_above_edge, 0.01);
  EXPECT_NEAR(result.summaries[2].gap, scaled_equilibrium_cdf_gap(150.0, 2), 1e-15);
  for (const auto& row : result.rows) {
    EXPECT_GE(row.empirical_cdf, 0.0);
    EXPECT_LE(row.empirical_cdf, 1.0 + 1e-12);
  }
  std::ostringstream out;
  write_finite_support_csv(out, result);
  const auto text = lines(out.str());
  EXPECT_EQ(text[0], "beta,x,empirical_cdf,limit_cdf");
  EXPECT_EQ(text.size(), result.rows.size() + 1);
}

TEST(Experiments, SupportEdgeForThreeChoices) {
  const std::vector<double> betas{20.0, 200.0};
  const auto result = finite_support_demo(betas, 3);
  const double q20 = result.summaries[0].quantile_999;
  const double q200 = result.summaries[1].quantile_999;
  EXPECT_LT(std::abs(q200 - 1.5), std::abs(q20 - 1.5));
  EXPECT_NEAR(q200, 1.5, 0.1);
}

TEST(Experiments, RunDirectory) {
  EXPECT_EQ(run_directory("out", "conv", 7), std::filesystem::path("out/conv-7"));
}
