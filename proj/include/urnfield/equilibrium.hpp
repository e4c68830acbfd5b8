#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "urnfield/pmf.hpp"
#include "urnfield/policy.hpp"

namespace urnfield {

/// Geometric law with parameter beta/(1+beta), truncated where the
/// remaining tail drops below 1e-14 and renormalized.
Pmf invariant_random(double beta);

struct WeightedEquilibrium {
  double gamma = 0.0;  // <pi, W>
  Pmf pmf;
  double residual = 0.0;  // |<pi, W> - gamma|
};

/// Solves beta = sum_n prod_{k<=n} beta W(k) / (gamma + beta W(k)) for gamma
/// by bisection on [c, C] and builds the product-form invariant law.
WeightedEquilibrium invariant_weighted(const WeightTable& weights, double beta, double tol = 1e-12);

/// Tail probabilities of the power-of-d equilibrium: xi[0] = 1 and
/// xi[n] = beta (xi[n-1]^d - xi[n]^d).
struct XiSequence {
  std::vector<double> xi;
  double beta = 0.0;
  int d = 2;

  /// max_n |xi[n] - beta (xi[n-1]^d - xi[n]^d)|
  double max_residual() const;
  /// sum_{n>=1} xi[n], which equals the mean load.
  double tail_sum() const;
};

struct PowerOfDEquilibrium {
  XiSequence xi;
  Pmf pmf;  // pmf(n) = xi[n] - xi[n+1]
};

PowerOfDEquilibrium invariant_power_of_d(double beta, int d, std::size_t n_max = 1'000'000);

/// Invariant law for any policy, via the closed form or recursion for it.
Pmf invariant_distribution(const PolicySpec& policy, double beta);

/// F_beta(pi)(n) = 1/(1 + beta Psi(pi,n)) prod_{k<n} beta Psi(pi,k)/(1 + beta Psi(pi,k)),
/// truncated where the running product drops below 1e-16 and renormalized.
Pmf apply_fixed_point_map(const PolicySpec& policy, double beta, const Pmf& pi);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-13;  // on TV(pi, F(pi))
  std::size_t max_iter = 200'000;
  int max_halvings = 4;  // theta never drops below damping / 2^max_halvings
};

struct FixedPointResult {
  Pmf pmf;
  std::size_t iterations = 0;
  double residual = 0.0;
  double final_damping = 0.0;
};

/// Damped iteration pi <- (1-theta) pi + theta F(pi). Halves theta when the
/// residual grows twice in a row, at most max_halvings times; long transient
/// rises at large beta would otherwise drive theta to zero. Throws
/// NonConvergence after max_iter.
FixedPointResult fixed_point_iterate(const PolicySpec& policy, double beta, const Pmf& init,
                                     const FixedPointOptions& options = {});

/// max over n of the stationary balance equations
///   pi(n)(1 + beta Psi(pi,n)) = pi(n-1) beta Psi(pi,n-1),  pi(0) beta Psi(pi,0) = 1 - pi(0).
double balance_residual(const PolicySpec& policy, double beta, const Pmf& pi);

struct TailBoundReport {
  bool holds = true;
  double max_violation = 0.0;  // max_k (P(Y >= k) - q^k)^+
};

/// Checks P(Y >= k) <= q^k with q = beta s / (1 + beta s), s = sup Psi.
TailBoundReport geometric_tail_bound_check(const Pmf& pmf, double beta, double psi_sup, double slack = 1e-12);

/// Large-load limit of Y/beta under power of d: survival function
/// h(x) = (1 - (d-1)/d x)^(1/(d-1)) on [0, d/(d-1)].
class LimitLaw {
 public:
  explicit LimitLaw(int d);

  int d() const noexcept { return d_; }
  double support_edge() const noexcept;
  double survival(double x) const noexcept;
  double cdf(double x) const noexcept { return 1.0 - survival(x); }
  /// d/(d-1) (1 - u^(d-1)) for u in [0,1].
  double from_uniform(double u) const noexcept;

  /// max over xs >= 0 of |h(x)^d - integral_x^inf h(u) du|, integral by
  /// tanh-sinh quadrature.
  double relation_residual(std::span<const double> xs) const;

 private:
  int d_;
};

/// sup_k |P(Y/beta <= k/beta) - P(Z <= k/beta)| for the power-of-d equilibrium Y
/// and the limit law Z.
double scaled_equilibrium_cdf_gap(double beta, int d);

}  // namespace urnfield
