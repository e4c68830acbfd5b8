#include "urnfield/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace urnfield {

WeightTable::WeightTable(std::vector<double> values, double tail_value)
    : values_(std::move(values)), tail_(tail_value), lower_(tail_value), upper_(tail_value) {
  if (!(tail_ > 0.0) || !std::isfinite(tail_))
    throw ConfigError("policy.weight_tail", "weights must be positive and finite");
  for (double w : values_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("policy.weights", "weights must be positive and finite");
    lower_ = std::min(lower_, w);
    upper_ = std::max(upper_, w);
  }
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "random";
    case PolicyKind::Weighted: return "weighted";
    case PolicyKind::PowerOfD: return "pow";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "random") return PolicyKind::Random;
  if (name == "weighted") return PolicyKind::Weighted;
  if (name == "pow" || name == "power-of-d") return PolicyKind::PowerOfD;
  throw ConfigError("policy.kind", "unknown policy '" + std::string(name) + "'");
}

void validate(const PolicySpec& policy, int h) {
  if (policy.kind != PolicyKind::PowerOfD) return;
  if (policy.d < 2) throw ConfigError("policy.d", "d must be at least 2, got " + std::to_string(policy.d));
  if (policy.d > h)
    throw ConfigError("policy.d", "d = " + std::to_string(policy.d) + " exceeds neighborhood size h_N = " +
                                      std::to_string(h));
}

double psi_sup(const PolicySpec& policy) {
  switch (policy.kind) {
    case PolicyKind::Random: return 1.0;
    case PolicyKind::Weighted: return policy.weights.upper() / policy.weights.lower();
    case PolicyKind::PowerOfD: return static_cast<double>(policy.d);
  }
  return 1.0;
}

namespace {

// C(n, d) / C(h, d) as a product of d ratios; zero when n < d.
double binomial_ratio(std::size_t n, std::size_t h, int d) {
  if (n < static_cast<std::size_t>(d)) return 0.0;
  double r = 1.0;
  for (int t = 0; t < d; ++t) r *= static_cast<double>(n - t) / static_cast<double>(h - t);
  return r;
}

double weighted_mean(const WeightTable& w, std::span<const double> sigma) {
  double s = 0.0;
  for (std::size_t k = 0; k < sigma.size(); ++k) s += sigma[k] * w(static_cast<Load>(k));
  return s;
}

// S(l) = sigma([l, inf)) for l = 0 .. size, with S(size) = 0.
std::vector<double> suffix_sums(std::span<const double> sigma) {
  std::vector<double> s(sigma.size() + 1, 0.0);
  for (std::size_t k = sigma.size(); k > 0; --k) s[k - 1] = s[k] + sigma[k - 1];
  return s;
}

}  // namespace

std::vector<double> alloc_probs(const PolicySpec& policy, std::span<const Load> loads) {
  const std::size_t h = loads.size();
  if (h == 0) throw ConfigError("loads", "empty neighborhood");
  std::vector<double> p(h);
  switch (policy.kind) {
    case PolicyKind::Random:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(h));
      break;
    case PolicyKind::Weighted: {
      double total = 0.0;
      for (std::size_t j = 0; j < h; ++j) total += (p[j] = policy.weights(loads[j]));
      for (double& x : p) x /= total;
      break;
    }
    case PolicyKind::PowerOfD: {
      validate(policy, static_cast<int>(h));
      std::vector<Load> sorted(loads.begin(), loads.end());
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t j = 0; j < h; ++j) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), loads[j]);
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), loads[j]);
        const auto at_least = static_cast<std::size_t>(sorted.end() - lo);
        const auto above = static_cast<std::size_t>(sorted.end() - hi);
        const auto ties = static_cast<double>(hi - lo);
        p[j] = (binomial_ratio(at_least, h, policy.d) - binomial_ratio(above, h, policy.d)) / ties;
      }
      break;
    }
  }
  return p;
}

double psi(const PolicySpec& policy, std::span<const double> sigma, Load l) {
  switch (policy.kind) {
    case PolicyKind::Random:
      return 1.0;
    case PolicyKind::Weighted:
      return policy.weights(l) / weighted_mean(policy.weights, sigma);
    case PolicyKind::PowerOfD: {
      if (l < 0 || static_cast<std::size_t>(l) >= sigma.size()) return 0.0;
      const auto k = static_cast<std::size_t>(l);
      if (sigma[k] <= 0.0) return 0.0;
      double at_least = 0.0;
      for (std::size_t j = sigma.size(); j > k + 1; --j) at_least += sigma[j - 1];
      const double above = at_least;
      at_least += sigma[k];
      return (std::pow(at_least, policy.d) - std::pow(above, policy.d)) / sigma[k];
    }
  }
  return 0.0;
}

std::vector<double> psi_table(const PolicySpec& policy, std::span<const double> sigma, std::size_t count) {
  std::vector<double> out(count, 0.0);
  switch (policy.kind) {
    case PolicyKind::Random:
      std::fill(out.begin(), out.end(), 1.0);
      break;
    case PolicyKind::Weighted: {
      const double mean = weighted_mean(policy.weights, sigma);
      for (std::size_t l = 0; l < count; ++l) out[l] = policy.weights(static_cast<Load>(l)) / mean;
      break;
    }
    case PolicyKind::PowerOfD: {
      const std::vector<double> s = suffix_sums(sigma);
      for (std::size_t l = 0; l < count && l < sigma.size(); ++l)
        if (sigma[l] > 0.0) out[l] = (std::pow(s[l], policy.d) - std::pow(s[l + 1], policy.d)) / sigma[l];
      break;
    }
  }
  return out;
}

std::vector<double> psi_flux(const PolicySpec& policy, std::span<const double> sigma) {
  std::vector<double> out(sigma.size(), 0.0);
  switch (policy.kind) {
    case PolicyKind::Random:
      std::copy(sigma.begin(), sigma.end(), out.begin());
      break;
    case PolicyKind::Weighted: {
      const double mean = weighted_mean(policy.weights, sigma);
      for (std::size_t l = 0; l < sigma.size(); ++l) out[l] = policy.weights(static_cast<Load>(l)) * sigma[l] / mean;
      break;
    }
    case PolicyKind::PowerOfD: {
      const std::vector<double> s = suffix_sums(sigma);
      for (std::size_t l = 0; l < sigma.size(); ++l) out[l] = std::pow(s[l], policy.d) - std::pow(s[l + 1], policy.d);
      break;
    }
  }
  return out;
}

double psi_mass_check(const PolicySpec& policy, const Pmf& sigma) {
  const std::vector<double> table = psi_table(policy, sigma.probs(), sigma.size());
  double s = 0.0;
  for (std::size_t l = 0; l < sigma.size(); ++l) s += sigma[l] * table[l];
  return s;
}

double finite_n_vs_psi_gap(const PolicySpec& policy, std::span<const Load> loads) {
  const std::vector<double> p = alloc_probs(policy, loads);
  const Pmf sigma = Pmf::empirical(loads);
  const double h = static_cast<double>(loads.size());
  double gap = 0.0;
  for (std::size_t j = 0; j < loads.size(); ++j) gap = std::max(gap, std::abs(h * p[j] - psi(policy, sigma, loads[j])));
  return gap;
}

}  // namespace urnfield
