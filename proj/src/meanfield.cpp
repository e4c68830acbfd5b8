#include "urnfield/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "urnfield/common.hpp"
#include "urnfield/rng.hpp"

namespace urnfield {

std::vector<double> generator_apply(const PolicySpec& policy, std::span<const double> sigma, double beta) {
  const std::vector<double> flux = psi_flux(policy, sigma);
  std::vector<double> out(sigma.size() + 1, 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) {
    total += sigma[x];
    out[x] -= sigma[x] + beta * flux[x];
    out[x + 1] += beta * flux[x];
  }
  out[0] += total;
  return out;
}

std::size_t default_truncation(const PolicySpec& policy, double beta) {
  const double s = psi_sup(policy);
  const double q = beta * s / (1.0 + beta * s);
  // beta s q^(K-1) < 1e-13
  const double k = 1.0 + std::log(1e-13 / (beta * s)) / std::log(q);
  const double floor = 4.0 * beta + 50.0;
  return static_cast<std::size_t>(std::ceil(std::max({k, floor, 1.0})));
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("grid", "empty time grid");
  if (grid.front() < 0.0 || !std::is_sorted(grid.begin(), grid.end()))
    throw ConfigError("grid", "time grid must be sorted and non-negative");
}

std::size_t resolve_truncation(const PolicySpec& policy, const Pmf& pi0, double beta, const FpControl& control) {
  if (!(beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  if (control.kmax_override) {
    if (*control.kmax_override < pi0.size() + 1)
      throw ConfigError("kmax_override", "truncation must exceed the support of the initial law");
    return *control.kmax_override;
  }
  return std::max(default_truncation(policy, beta), pi0.size() + 1);
}

// Up-rate out of the last retained state.
double boundary_flux(const PolicySpec& policy, std::span<const double> y, double beta) {
  const double top = std::max(0.0, y.back());
  switch (policy.kind) {
    case PolicyKind::Random: return beta * top;
    case PolicyKind::PowerOfD: return beta * std::pow(top, policy.d);
    case PolicyKind::Weighted: {
      double mean = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) mean += y[k] * policy.weights(static_cast<Load>(k));
      return beta * policy.weights(static_cast<Load>(y.size() - 1)) * top / mean;
    }
  }
  return 0.0;
}

double mean_of(std::span<const double> y) {
  double m = 0.0;
  for (std::size_t k = 1; k < y.size(); ++k) m += static_cast<double>(k) * y[k];
  return m;
}

}  // namespace

MeanFieldSolution solve_fp(const PolicySpec& policy, const Pmf& pi0, double beta, std::span<const double> grid,
                           const FpControl& control) {
  check_grid(grid);
  const std::size_t kmax = resolve_truncation(policy, pi0, beta, control);

  std::vector<double> y(kmax, 0.0);
  const double total0 = pi0.total();
  for (std::size_t k = 0; k < pi0.size(); ++k) y[k] = pi0[k] / total0;

  auto rhs = [&](double, std::span<const double> state, std::span<double> dydt) {
    const std::vector<double> flux = psi_flux(policy, state);
    double total = 0.0;
    for (std::size_t x = 0; x < kmax; ++x) {
      total += state[x];
      dydt[x] = -state[x];
    }
    for (std::size_t x = 0; x + 1 < kmax; ++x) {
      dydt[x] -= beta * flux[x];
      dydt[x + 1] += beta * flux[x];
    }
    dydt[0] += total;
  };

  MeanFieldSolution sol;
  sol.truncation = kmax;
  auto admissible = [&](std::span<const double> state) {
    const double leak = std::abs(1.0 - std::accumulate(state.begin(), state.end(), 0.0));
    if (leak >= control.mass_leak_tol) return false;
    sol.stats.max_mass_leak = std::max(sol.stats.max_mass_leak, leak);
    sol.stats.max_boundary_flux = std::max(sol.stats.max_boundary_flux, boundary_flux(policy, state, beta));
    return true;
  };

  OdeOptions options;
  options.atol = control.tol;
  options.max_step = control.max_step;
  DormandPrince45 solver(rhs, kmax, options);

  double t = 0.0;
  for (double target : grid) {
    solver.advance(y, t, target, admissible);
    if (sol.stats.max_boundary_flux > control.boundary_flux_tol)
      throw TruncationTooSmall("boundary flux " + std::to_string(sol.stats.max_boundary_flux) + " at K = " +
                               std::to_string(kmax) + "; raise the truncation");
    sol.times.push_back(target);
    sol.mass_series.push_back(mean_of(y));
    sol.pmfs.emplace_back(y);
  }
  sol.stats.accepted_steps = solver.stats().accepted;
  sol.stats.rejected_steps = solver.stats().rejected;
  return sol;
}

MeanFieldSolution solve_fp_survival(int d, const Pmf& pi0, double beta, std::span<const double> grid,
                                    const FpControl& control) {
  check_grid(grid);
  const PolicySpec policy = PolicySpec::power_of_d(d);
  validate(policy, d);
  const std::size_t kmax = resolve_truncation(policy, pi0, beta, control);

  // eta[n - 1] = eta_n for n = 1 .. kmax-1; eta_0 = 1 and eta_kmax = 0.
  std::vector<double> eta(kmax - 1, 0.0);
  const double total0 = pi0.total();
  for (std::size_t n = 1; n < kmax; ++n) eta[n - 1] = pi0.survival(n) / total0;

  auto rhs = [&](double, std::span<const double> state, std::span<double> dydt) {
    double prev = 1.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      dydt[i] = beta * (std::pow(prev, d) - std::pow(state[i], d)) - state[i];
      prev = state[i];
    }
  };

  auto to_pmf = [&](std::span<const double> state) {
    std::vector<double> p(kmax);
    double prev = 1.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      p[i] = prev - state[i];
      prev = state[i];
    }
    p[kmax - 1] = prev;
    return p;
  };

  OdeOptions options;
  options.atol = control.tol;
  options.max_step = control.max_step;
  DormandPrince45 solver(rhs, eta.size(), options);

  MeanFieldSolution sol;
  sol.truncation = kmax;
  double t = 0.0;
  for (double target : grid) {
    solver.advance(eta, t, target);
    std::vector<double> p = to_pmf(eta);
    sol.times.push_back(target);
    sol.mass_series.push_back(mean_of(p));
    sol.stats.max_boundary_flux = std::max(sol.stats.max_boundary_flux, beta * std::pow(std::max(0.0, eta.back()), d));
    sol.pmfs.emplace_back(std::move(p));
  }
  sol.stats.accepted_steps = solver.stats().accepted;
  sol.stats.rejected_steps = solver.stats().rejected;
  return sol;
}

namespace {

// Per-grid Psi tables for the thinning sampler.
struct DriftTables {
  std::vector<std::vector<double>> psi;  // psi[g][l], l < width
  std::vector<double> weight_means;      // <pi(t_g), W>, weighted policy only
  std::size_t width = 0;
};

DriftTables build_tables(const PolicySpec& policy, const MeanFieldSolution& path) {
  DriftTables tables;
  tables.width = path.truncation;
  for (const Pmf& pi : path.pmfs) {
    tables.psi.push_back(psi_table(policy, pi.probs(), tables.width));
    if (policy.kind == PolicyKind::Weighted) {
      double mean = 0.0;
      for (std::size_t k = 0; k < pi.size(); ++k) mean += pi[k] * policy.weights(static_cast<Load>(k));
      tables.weight_means.push_back(mean);
    }
  }
  return tables;
}

double drift(const PolicySpec& policy, const DriftTables& tables, std::size_t g, Load l) {
  if (static_cast<std::size_t>(l) < tables.width) return tables.psi[g][static_cast<std::size_t>(l)];
  switch (policy.kind) {
    case PolicyKind::Random: return 1.0;
    case PolicyKind::Weighted: return policy.weights(l) / tables.weight_means[g];
    case PolicyKind::PowerOfD: return 0.0;  // sigma({l}) = 0
  }
  return 0.0;
}

using Counts = std::vector<std::vector<std::uint64_t>>;

void bump(Counts& counts, std::size_t g, Load l) {
  auto& row = counts[g];
  const auto k = static_cast<std::size_t>(l);
  if (k >= row.size()) row.resize(k + 1, 0);
  ++row[k];
}

Load sample_initial(const Pmf& initial, SplitMix64& rng) {
  const double u = uniform01(rng) * initial.total();
  double acc = 0.0;
  for (std::size_t k = 0; k < initial.size(); ++k) {
    acc += initial[k];
    if (u < acc) return static_cast<Load>(k);
  }
  return static_cast<Load>(initial.size() - 1);
}

void simulate_particle(const PolicySpec& policy, const MeanFieldSolution& path, const DriftTables& tables,
                       const Pmf& initial, double beta, std::uint64_t seed, Counts& counts) {
  SplitMix64 rng(seed);
  const double bound = 1.0 + beta * psi_sup(policy);
  const auto& times = path.times;
  const double horizon = times.back();
  Load l = sample_initial(initial, rng);
  double t = 0.0;
  std::size_t g = 0;
  while (true) {
    const double t_next = t + exponential(rng, bound);
    while (g < times.size() && times[g] < t_next) bump(counts, g++, l);
    if (t_next > horizon) break;
    t = t_next;
    const std::size_t interval = g == 0 ? 0 : g - 1;
    const double u = uniform01(rng) * bound;
    if (u < 1.0)
      l = 0;
    else if (u - 1.0 < beta * drift(policy, tables, interval, l))
      ++l;
  }
}

void check_mckv_inputs(const MeanFieldSolution& path, std::size_t replicas) {
  if (replicas == 0) throw ConfigError("replicas", "need at least one replica");
  if (path.times.empty()) throw ConfigError("path", "empty law path");
}

std::vector<Pmf> to_pmfs(const Counts& counts) {
  std::vector<Pmf> out;
  out.reserve(counts.size());
  for (const auto& row : counts) out.push_back(Pmf::from_counts(row));
  return out;
}

void merge(Counts& into, const Counts& from) {
  for (std::size_t g = 0; g < from.size(); ++g) {
    if (into[g].size() < from[g].size()) into[g].resize(from[g].size(), 0);
    for (std::size_t k = 0; k < from[g].size(); ++k) into[g][k] += from[g][k];
  }
}

}  // namespace

std::vector<Pmf> simulate_mckv_serial(const PolicySpec& policy, const MeanFieldSolution& path, const Pmf& initial,
                                      double beta, std::size_t replicas, std::uint64_t seed) {
  check_mckv_inputs(path, replicas);
  const DriftTables tables = build_tables(policy, path);
  Counts counts(path.times.size());
  for (std::size_t r = 0; r < replicas; ++r)
    simulate_particle(policy, path, tables, initial, beta, derive_seed(seed, r), counts);
  return to_pmfs(counts);
}

std::vector<Pmf> simulate_mckv(const PolicySpec& policy, const MeanFieldSolution& path, const Pmf& initial,
                               double beta, std::size_t replicas, std::uint64_t seed, int threads) {
  check_mckv_inputs(path, replicas);
  const DriftTables tables = build_tables(policy, path);
  Counts counts(path.times.size());
  detail::FirstError error;
#pragma omp parallel num_threads(detail::resolve_threads(threads))
  {
    Counts local(path.times.size());
#pragma omp for schedule(static)
    for (std::size_t r = 0; r < replicas; ++r)
      error.guard([&] { simulate_particle(policy, path, tables, initial, beta, derive_seed(seed, r), local); });
    // Integer counts: the merge order does not affect the result.
#pragma omp critical(urnfield_mckv_merge)
    merge(counts, local);
  }
  error.rethrow();
  return to_pmfs(counts);
}

double exp_moment(const Pmf& pmf, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("exp_moment: eta must be positive");
  double s = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k)
    if (pmf[k] > 0.0) s += std::exp(eta * static_cast<double>(k)) * pmf[k];
  if (!std::isfinite(s)) throw std::overflow_error("exp_moment: exponential moment overflows");
  return s;
}

}  // namespace urnfield
