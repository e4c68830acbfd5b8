#include "urnfield/experiments.hpp"

#include <cmath>
#include <ostream>

#include "urnfield/equilibrium.hpp"
#include "urnfield/metrics.hpp"

namespace urnfield {

void validate(const ExperimentSpec& spec) {
  if (spec.sweep.empty()) throw ConfigError("experiment.sweep", "sweep must not be empty");
  for (const SweepPoint& p : spec.sweep) {
    if (p.replicas < 1) throw ConfigError("replicas", "need at least one replica");
    if (!(p.beta > 0.0)) throw ConfigError("beta", "beta must be positive");
    if (!(p.horizon > 0.0)) throw ConfigError("horizon", "horizon must be positive");
  }
  if (!(spec.burn_in >= 0.0 && spec.burn_in < 1.0))
    throw ConfigError("experiment.burn_in", "burn-in fraction must lie in [0, 1)");
  if (spec.init == InitKind::ExplicitLoads)
    throw ConfigError("initializer.kind", "experiments need a translation-invariant random initializer");
}

Pmf initial_law(InitKind init, double beta) {
  switch (init) {
    case InitKind::BalancedRotated: {
      const double lo = std::floor(beta);
      const double frac = beta - lo;
      std::vector<double> probs(static_cast<std::size_t>(lo) + 2, 0.0);
      probs[static_cast<std::size_t>(lo)] = 1.0 - frac;
      probs[static_cast<std::size_t>(lo) + 1] = frac;
      return Pmf(std::move(probs));
    }
    case InitKind::MultinomialUniform: {
      std::vector<double> probs;
      double term = std::exp(-beta);
      double tail = 1.0;
      for (std::size_t k = 0; tail > 1e-16 || static_cast<double>(k) < beta; ++k) {
        probs.push_back(term);
        tail -= term;
        term *= beta / static_cast<double>(k + 1);
      }
      return Pmf::from_weights(std::move(probs));
    }
    case InitKind::ExplicitLoads:
      break;
  }
  throw ConfigError("initializer.kind", "explicit loads have no limit law");
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

SimConfig point_config(const ExperimentSpec& spec, const SweepPoint& point, std::size_t index) {
  SimConfig config;
  config.topology = point.topology;
  config.policy = point.policy;
  config.beta = point.beta;
  config.horizon = point.horizon;
  config.seed = derive_seed(spec.seed, index);
  config.init.kind = spec.init;
  return config;
}

}  // namespace

std::vector<ConvergenceRow> mean_field_convergence(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < spec.sweep.size(); ++i) {
    const SweepPoint& point = spec.sweep[i];
    SimConfig config = point_config(spec, point, i);
    config.record_grid = uniform_grid(point.horizon, spec.grid_step);

    const MeanFieldSolution limit = solve_fp(point.policy, initial_law(spec.init, point.beta), point.beta,
                                             config.record_grid);
    const auto records = run_ensemble(config, point.replicas, spec.threads);

    std::vector<double> tvs, gaps, combined;
    for (const TrajectoryRecord& rec : records) {
      tvs.push_back(sup_time_tv(rec.local_empirical, limit.pmfs));
      gaps.push_back(sup_time_mean_gap(rec.local_empirical, limit.pmfs));
      combined.push_back(tvs.back() + gaps.back());
    }
    ConvergenceRow row;
    row.n = records.front().n;
    row.h = records.front().h;
    row.topology = std::string(to_string(point.topology.kind));
    row.policy = std::string(to_string(point.policy.kind));
    row.beta = point.beta;
    row.replicas = point.replicas;
    const MeanSe tv_stat = mean_se(tvs), gap_stat = mean_se(gaps), comb_stat = mean_se(combined);
    row.tv_mean = tv_stat.mean;
    row.tv_se = tv_stat.se;
    row.mean_gap_mean = gap_stat.mean;
    row.mean_gap_se = gap_stat.se;
    row.combined_mean = comb_stat.mean;
    row.combined_se = comb_stat.se;
    rows.push_back(row);
  }
  return rows;
}

std::vector<StationaryRow> stationary_comparison(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<StationaryRow> rows;
  for (std::size_t i = 0; i < spec.sweep.size(); ++i) {
    const SweepPoint& point = spec.sweep[i];
    SimConfig config = point_config(spec, point, i);
    config.record_grid = {point.horizon};
    config.average_from = spec.burn_in * point.horizon;

    const Pmf target = invariant_distribution(point.policy, point.beta);
    const auto records = run_ensemble(config, point.replicas, spec.threads);
    std::vector<double> tvs;
    for (const TrajectoryRecord& rec : records) tvs.push_back(tv(*rec.time_averaged_global, target));

    StationaryRow row;
    row.n = records.front().n;
    row.h = records.front().h;
    row.topology = std::string(to_string(point.topology.kind));
    row.policy = std::string(to_string(point.policy.kind));
    row.beta = point.beta;
    row.horizon = point.horizon;
    row.replicas = point.replicas;
    const MeanSe stat = mean_se(tvs);
    row.tv_mean = stat.mean;
    row.tv_se = stat.se;
    rows.push_back(row);
  }
  return rows;
}

FiniteSupportResult finite_support_demo(std::span<const double> betas, int d) {
  if (betas.empty()) throw ConfigError("experiment.betas", "need at least one beta");
  const LimitLaw law(d);
  FiniteSupportResult result;
  result.d = d;
  for (double beta : betas) {
    const PowerOfDEquilibrium eq = invariant_power_of_d(beta, d);
    const auto& xi = eq.xi.xi;
    const auto last = static_cast<std::size_t>(std::ceil(1.1 * law.support_edge() * beta)) + 1;
    FiniteSupportSummary summary;
    summary.beta = beta;
    summary.gap = scaled_equilibrium_cdf_gap(beta, d);
    summary.mass_above_edge = eq.pmf.survival(static_cast<std::size_t>(std::floor(1.1 * law.support_edge() * beta)) + 1);
    bool found = false;
    for (std::size_t k = 0; k <= last || !found; ++k) {
      const double cdf = 1.0 - (k + 1 < xi.size() ? xi[k + 1] : 0.0);
      if (!found && cdf >= 0.999) {
        summary.quantile_999 = static_cast<double>(k) / beta;
        found = true;
      }
      if (k <= last) {
        const double x = static_cast<double>(k) / beta;
        result.rows.push_back({beta, x, cdf, law.cdf(x)});
      }
    }
    result.summaries.push_back(summary);
  }
  return result;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows) {
  out << "n,h,topology,policy,beta,replicas,tv_mean,tv_se,mean_gap_mean,mean_gap_se,combined_mean,combined_se\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.n << ',' << r.h << ',' << r.topology << ',' << r.policy << ',' << r.beta << ',' << r.replicas << ','
        << r.tv_mean << ',' << r.tv_se << ',' << r.mean_gap_mean << ',' << r.mean_gap_se << ',' << r.combined_mean
        << ',' << r.combined_se << '\n';
}

void write_stationary_csv(std::ostream& out, std::span<const StationaryRow> rows) {
  out << "n,h,topology,policy,beta,horizon,replicas,tv_mean,tv_se\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.n << ',' << r.h << ',' << r.topology << ',' << r.policy << ',' << r.beta << ',' << r.horizon << ','
        << r.replicas << ',' << r.tv_mean << ',' << r.tv_se << '\n';
}

void write_finite_support_csv(std::ostream& out, const FiniteSupportResult& result) {
  out << "beta,x,empirical_cdf,limit_cdf\n";
  out.precision(12);
  for (const auto& r : result.rows) out << r.beta << ',' << r.x << ',' << r.empirical_cdf << ',' << r.limit_cdf << '\n';
}

std::filesystem::path run_directory(const std::filesystem::path& base, const std::string& name, std::uint64_t seed) {
  return base / (name + "-" + std::to_string(seed));
}

}  // namespace urnfield
