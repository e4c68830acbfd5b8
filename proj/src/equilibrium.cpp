#include "urnfield/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "urnfield/common.hpp"
#include "urnfield/metrics.hpp"

namespace urnfield {

Pmf invariant_random(double beta) {
  if (!(beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  const double q = beta / (1.0 + beta);
  std::vector<double> probs;
  for (std::size_t n = 0;; ++n) {
    const double tail = std::pow(q, static_cast<double>(n));
    if (tail < 1e-14) break;
    probs.push_back((1.0 - q) * tail);
  }
  return Pmf::from_weights(std::move(probs));
}

namespace {

constexpr double kProductCutoff = 1e-16;

// Right-hand side of the gamma equation. The table part is summed term by
// term; beyond it W is constant and the tail is a geometric series.
double gamma_equation_rhs(const WeightTable& w, double beta, double gamma) {
  double product = 1.0;
  double sum = 0.0;
  const auto table = w.values();
  for (std::size_t k = 0; k < table.size(); ++k) {
    product *= beta * table[k] / (gamma + beta * table[k]);
    sum += product;
    if (product < kProductCutoff) return sum;
  }
  const double r = beta * w.tail_value() / (gamma + beta * w.tail_value());
  return sum + product * r / (1.0 - r);
}

}  // namespace

WeightedEquilibrium invariant_weighted(const WeightTable& weights, double beta, double tol) {
  if (!(beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  // beta c / gamma <= rhs(gamma) <= beta C / gamma, so the root lies in [c, C].
  double lo = weights.lower() * (1.0 - 1e-12);
  double hi = weights.upper() * (1.0 + 1e-12);
  const double f_lo = gamma_equation_rhs(weights, beta, lo) - beta;
  const double f_hi = gamma_equation_rhs(weights, beta, hi) - beta;
  if (f_lo < 0.0 || f_hi > 0.0)
    throw BracketFailure("gamma equation does not change sign on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gamma_equation_rhs(weights, beta, mid) - beta > 0.0 ? lo : hi) = mid;
  }
  const double gamma = 0.5 * (lo + hi);

  std::vector<double> probs;
  double product = 1.0;
  for (Load n = 0; product >= kProductCutoff; ++n) {
    const double bw = beta * weights(n);
    probs.push_back(product * gamma / (gamma + bw));
    product *= bw / (gamma + bw);
  }
  Pmf pmf = Pmf::from_weights(std::move(probs));
  double mean_w = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) mean_w += pmf[k] * weights(static_cast<Load>(k));
  WeightedEquilibrium out{gamma, std::move(pmf), std::abs(mean_w - gamma)};
  if (out.residual >= tol)
    throw NonConvergence("weighted equilibrium residual " + std::to_string(out.residual), out.residual);
  return out;
}

double XiSequence::max_residual() const {
  double r = 0.0;
  for (std::size_t n = 1; n < xi.size(); ++n)
    r = std::max(r, std::abs(xi[n] - beta * (std::pow(xi[n - 1], d) - std::pow(xi[n], d))));
  return r;
}

double XiSequence::tail_sum() const {
  double s = 0.0;
  for (std::size_t n = xi.size(); n > 1; --n) s += xi[n - 1];
  return s;
}

PowerOfDEquilibrium invariant_power_of_d(double beta, int d, std::size_t n_max) {
  if (!(beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  if (d < 2) throw ConfigError("policy.d", "d must be at least 2");
  XiSequence seq{{1.0}, beta, d};
  while (seq.xi.size() <= n_max) {
    const double prev = seq.xi.back();
    const double target = beta * std::pow(prev, d);
    // g(x) = x + beta x^d - target is convex and increasing on [0, prev] with
    // g(min(prev, target)) >= 0, so Newton from there decreases monotonically.
    double x = std::min(prev, target);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const double g = x + beta * std::pow(x, d) - target;
      const double slope = 1.0 + d * beta * std::pow(x, d - 1);
      const double next = std::max(0.0, x - g / slope);
      if (!(next < x) || x - next <= 1e-17 * x) {
        x = std::min(x, next);
        converged = true;
        break;
      }
      x = next;
    }
    if (!converged) throw NonConvergence("xi recursion root did not converge", x);
    seq.xi.push_back(x);
    if (x < 1e-16) break;
  }

  std::vector<double> probs(seq.xi.size());
  for (std::size_t n = 0; n < seq.xi.size(); ++n)
    probs[n] = seq.xi[n] - (n + 1 < seq.xi.size() ? seq.xi[n + 1] : 0.0);
  return {std::move(seq), Pmf(std::move(probs))};
}

Pmf invariant_distribution(const PolicySpec& policy, double beta) {
  switch (policy.kind) {
    case PolicyKind::Random: return invariant_random(beta);
    case PolicyKind::Weighted: return invariant_weighted(policy.weights, beta).pmf;
    case PolicyKind::PowerOfD: return invariant_power_of_d(beta, policy.d).pmf;
  }
  return {};
}

Pmf apply_fixed_point_map(const PolicySpec& policy, double beta, const Pmf& pi) {
  const std::vector<double> table = psi_table(policy, pi.probs(), pi.size() + 1);
  double weight_mean = 0.0;
  if (policy.kind == PolicyKind::Weighted)
    for (std::size_t k = 0; k < pi.size(); ++k) weight_mean += pi[k] * policy.weights(static_cast<Load>(k));

  auto rate = [&](std::size_t n) {
    if (n < table.size()) return beta * table[n];
    switch (policy.kind) {
      case PolicyKind::Random: return beta;
      case PolicyKind::Weighted: return beta * policy.weights(static_cast<Load>(n)) / weight_mean;
      case PolicyKind::PowerOfD: return 0.0;
    }
    return 0.0;
  };

  std::vector<double> out;
  double product = 1.0;
  for (std::size_t n = 0; product >= kProductCutoff; ++n) {
    const double r = rate(n);
    out.push_back(product / (1.0 + r));
    product *= r / (1.0 + r);
  }
  return Pmf::from_weights(std::move(out));
}

namespace {

Pmf mix(const Pmf& a, const Pmf& b, double theta) {
  std::vector<double> out(std::max(a.size(), b.size()));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - theta) * a[k] + theta * b[k];
  return Pmf::from_weights(std::move(out));
}

}  // namespace

FixedPointResult fixed_point_iterate(const PolicySpec& policy, double beta, const Pmf& init,
                                     const FixedPointOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ConfigError("damping", "damping must lie in (0, 1]");
  if (!(beta > 0.0)) throw ConfigError("beta", "beta must be positive");
  double theta = options.damping;
  int halvings = 0;
  Pmf pi = init;
  double previous = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Pmf image = apply_fixed_point_map(policy, beta, pi);
    const double residual = tv(pi, image);
    if (residual < options.tol) return {std::move(pi), it, residual, theta};
    growth = residual > previous ? growth + 1 : 0;
    if (growth >= 2 && halvings < options.max_halvings) {
      theta *= 0.5;
      ++halvings;
      growth = 0;
    }
    previous = residual;
    pi = theta == 1.0 ? std::move(image) : mix(pi, image, theta);
  }
  const double residual = tv(pi, apply_fixed_point_map(policy, beta, pi));
  throw NonConvergence("fixed-point iteration stalled at TV residual " + std::to_string(residual), residual);
}

double balance_residual(const PolicySpec& policy, double beta, const Pmf& pi) {
  const std::vector<double> flux = psi_flux(policy, pi.probs());
  auto f = [&](std::size_t n) { return n < flux.size() ? flux[n] : 0.0; };
  double r = std::abs(beta * f(0) - (1.0 - pi[0]));
  for (std::size_t n = 1; n <= pi.size(); ++n) r = std::max(r, std::abs(pi[n] + beta * f(n) - beta * f(n - 1)));
  return r;
}

TailBoundReport geometric_tail_bound_check(const Pmf& pmf, double beta, double psi_sup, double slack) {
  const double q = beta * psi_sup / (1.0 + beta * psi_sup);
  TailBoundReport report;
  double survival = 0.0;
  for (std::size_t k = pmf.size(); k > 0; --k) {
    survival += pmf[k - 1];
    const double violation = survival - std::pow(q, static_cast<double>(k - 1));
    report.max_violation = std::max(report.max_violation, violation);
  }
  report.holds = report.max_violation <= slack;
  return report;
}

LimitLaw::LimitLaw(int d) : d_(d) {
  if (d < 2) throw ConfigError("policy.d", "d must be at least 2");
}

double LimitLaw::support_edge() const noexcept { return static_cast<double>(d_) / (d_ - 1); }

double LimitLaw::survival(double x) const noexcept {
  if (x <= 0.0) return 1.0;
  if (x >= support_edge()) return 0.0;
  return std::pow(1.0 - x / support_edge(), 1.0 / (d_ - 1));
}

double LimitLaw::from_uniform(double u) const noexcept {
  return support_edge() * (1.0 - std::pow(u, d_ - 1));
}

double LimitLaw::relation_residual(std::span<const double> xs) const {
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double edge = support_edge();
  double worst = 0.0;
  for (double x : xs) {
    if (x < 0.0) throw std::invalid_argument("relation_residual: x must be non-negative");
    const double integral =
        x < edge ? integrator.integrate([this](double u) { return survival(u); }, x, edge, 1e-14) : 0.0;
    worst = std::max(worst, std::abs(std::pow(survival(x), d_) - integral));
  }
  return worst;
}

double scaled_equilibrium_cdf_gap(double beta, int d) {
  const PowerOfDEquilibrium eq = invariant_power_of_d(beta, d);
  const LimitLaw law(d);
  const auto& xi = eq.xi.xi;
  const auto last = static_cast<std::size_t>(std::ceil(std::max(static_cast<double>(xi.size()), law.support_edge() * beta))) + 1;
  double gap = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const double empirical = 1.0 - (k + 1 < xi.size() ? xi[k + 1] : 0.0);
    gap = std::max(gap, std::abs(empirical - law.cdf(static_cast<double>(k) / beta)));
  }
  return gap;
}

}  // namespace urnfield
