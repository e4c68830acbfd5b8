#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "urnfield/ode.hpp"
#include "urnfield/pmf.hpp"
#include "urnfield/policy.hpp"

namespace urnfield {

/// Right-hand side of the nonlinear master equation at sigma:
///   d pi(x)/dt = beta Psi sigma(x-1) - beta Psi sigma(x) - sigma(x) + [x = 0] <sigma, 1>.
/// Returned vector has one entry more than sigma (the up-flux out of the
/// last atom lands there).
std::vector<double> generator_apply(const PolicySpec& policy, std::span<const double> sigma, double beta);

struct FpControl {
  double tol = 1e-10;                 // absolute per-component error
  double mass_leak_tol = 1e-10;       // |1 - sum pi| on accepted steps
  double boundary_flux_tol = 1e-12;   // up-rate out of the last retained state
  double max_step = 0.25;
  std::optional<std::size_t> kmax_override;
};

struct MeanFieldStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double max_boundary_flux = 0.0;
  double max_mass_leak = 0.0;
};

struct MeanFieldSolution {
  std::vector<double> times;
  std::vector<Pmf> pmfs;
  std::vector<double> mass_series;  // <pi(t), I>
  std::size_t truncation = 0;       // states 0 .. truncation-1
  MeanFieldStats stats;
};

/// Number of retained states: the geometric tail bound for an invariant law
/// keeps the boundary up-rate below 1e-13, and at least 4 beta + 50.
std::size_t default_truncation(const PolicySpec& policy, double beta);

/// Integrates the Fokker-Planck equation from pi0 and samples it on `grid`
/// (sorted, starting at 0 or later). The top state is reflecting; the
/// up-rate through it is monitored and must stay below boundary_flux_tol.
MeanFieldSolution solve_fp(const PolicySpec& policy, const Pmf& pi0, double beta, std::span<const double> grid,
                           const FpControl& control = {});

/// Power-of-d only: integrates the tail coordinates eta_n = pi([n, inf)),
///   eta_n' = beta (eta_{n-1}^d - eta_n^d) - eta_n,  eta_0 = 1,
/// and converts back. Independent cross-check of solve_fp.
MeanFieldSolution solve_fp_survival(int d, const Pmf& pi0, double beta, std::span<const double> grid,
                                    const FpControl& control = {});

/// Simulates `replicas` independent copies of the nonlinear jump process
/// (up at rate beta Psi(pi(t), L), reset to 0 at rate 1) driven by the
/// law path in `path`, which is held piecewise constant (left value)
/// between grid points. Returns the empirical law at each grid time.
std::vector<Pmf> simulate_mckv(const PolicySpec& policy, const MeanFieldSolution& path, const Pmf& initial,
                               double beta, std::size_t replicas, std::uint64_t seed, int threads = 0);

/// Sequential reference for simulate_mckv.
std::vector<Pmf> simulate_mckv_serial(const PolicySpec& policy, const MeanFieldSolution& path, const Pmf& initial,
                                      double beta, std::size_t replicas, std::uint64_t seed);

/// sum_x exp(eta x) pmf(x); throws std::overflow_error when not finite.
double exp_moment(const Pmf& pmf, double eta);

}  // namespace urnfield
