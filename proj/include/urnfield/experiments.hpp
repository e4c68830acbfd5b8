#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "urnfield/engine.hpp"
#include "urnfield/meanfield.hpp"

namespace urnfield {

struct SweepPoint {
  TopologySpec topology;  // carries N
  PolicySpec policy;
  double beta = 2.0;
  double horizon = 5.0;
  int replicas = 30;
};

enum class Statistic { SupTvLocal, SupMeanGap, StationaryTv, ScaledCdfGap };

struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<SweepPoint> sweep;
  std::vector<Statistic> statistics;
  std::filesystem::path output;
  std::uint64_t seed = 1;
  double grid_step = 0.05;
  double burn_in = 0.5;  // stationary_comparison averages over [burn_in T, T]
  InitKind init = InitKind::BalancedRotated;
  int threads = 0;
};

/// Throws ConfigError on an empty sweep or non-positive replica counts.
void validate(const ExperimentSpec& spec);

/// Large-N limit of the local empirical law at time 0 for an initializer:
/// balanced loads give the two-point law on floor(beta), ceil(beta);
/// multinomial loads give Poisson(beta).
Pmf initial_law(InitKind init, double beta);

struct ConvergenceRow {
  int n = 0;
  int h = 0;
  std::string topology;
  std::string policy;
  double beta = 0.0;
  int replicas = 0;
  double tv_mean = 0.0, tv_se = 0.0;
  double mean_gap_mean = 0.0, mean_gap_se = 0.0;
  double combined_mean = 0.0, combined_se = 0.0;
};

/// Per sweep point: mean and standard error over replicas of
/// sup_t TV(local empirical at urn 1, Pi(t)) and sup_t |mean gap|, with Pi
/// from solve_fp started at the matching initial law.
std::vector<ConvergenceRow> mean_field_convergence(const ExperimentSpec& spec);

struct StationaryRow {
  int n = 0;
  int h = 0;
  std::string topology;
  std::string policy;
  double beta = 0.0;
  double horizon = 0.0;
  int replicas = 0;
  double tv_mean = 0.0, tv_se = 0.0;
};

/// TV between the time-averaged global histogram over [burn_in T, T] and
/// the mean-field invariant law.
std::vector<StationaryRow> stationary_comparison(const ExperimentSpec& spec);

struct FiniteSupportRow {
  double beta = 0.0;
  double x = 0.0;
  double empirical_cdf = 0.0;
  double limit_cdf = 0.0;
};

struct FiniteSupportSummary {
  double beta = 0.0;
  double gap = 0.0;
  double mass_above_edge = 0.0;  // P(Y > 1.1 d/(d-1) beta)
  double quantile_999 = 0.0;     // 0.999 quantile of Y / beta
};

struct FiniteSupportResult {
  int d = 2;
  std::vector<FiniteSupportRow> rows;
  std::vector<FiniteSupportSummary> summaries;
};

FiniteSupportResult finite_support_demo(std::span<const double> betas, int d);

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows);
void write_stationary_csv(std::ostream& out, std::span<const StationaryRow> rows);
void write_finite_support_csv(std::ostream& out, const FiniteSupportResult& result);

/// `<base>/<name>-<seed>`
std::filesystem::path run_directory(const std::filesystem::path& base, const std::string& name, std::uint64_t seed);

}  // namespace urnfield
