#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "urnfield/common.hpp"
#include "urnfield/pmf.hpp"

namespace urnfield {

/// W(0..m) followed by a constant tail value for every l > m.
class WeightTable {
 public:
  WeightTable() : WeightTable({}, 1.0) {}
  WeightTable(std::vector<double> values, double tail_value);

  double operator()(Load l) const noexcept {
    return l >= 0 && static_cast<std::size_t>(l) < values_.size() ? values_[static_cast<std::size_t>(l)] : tail_;
  }

  std::span<const double> values() const noexcept { return values_; }
  double tail_value() const noexcept { return tail_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  std::vector<double> values_;
  double tail_;
  double lower_;
  double upper_;
};

enum class PolicyKind { Random, Weighted, PowerOfD };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::Random;
  int d = 2;
  WeightTable weights;

  static PolicySpec random() { return {}; }
  static PolicySpec weighted(WeightTable table) { return {PolicyKind::Weighted, 2, std::move(table)}; }
  static PolicySpec power_of_d(int d) { return {PolicyKind::PowerOfD, d, {}}; }
};

/// Throws ConfigError unless the policy can run on neighborhoods of size h.
void validate(const PolicySpec& policy, int h);

/// Upper bound on Psi: 1, d or C/c.
double psi_sup(const PolicySpec& policy);

/// Probability that one ball lands in each neighbor, given neighbor loads.
std::vector<double> alloc_probs(const PolicySpec& policy, std::span<const Load> loads);

/// Psi(sigma, l). `sigma` may be a raw probability vector (not re-checked).
double psi(const PolicySpec& policy, std::span<const double> sigma, Load l);
inline double psi(const PolicySpec& policy, const Pmf& sigma, Load l) { return psi(policy, sigma.probs(), l); }

/// Psi(sigma, l) for l = 0 .. count-1.
std::vector<double> psi_table(const PolicySpec& policy, std::span<const double> sigma, std::size_t count);

/// Psi(sigma, l) * sigma(l) for l in the support of sigma. For power of d
/// this is S(l)^d - S(l+1)^d, computed without dividing by sigma(l).
std::vector<double> psi_flux(const PolicySpec& policy, std::span<const double> sigma);

/// <sigma, Psi(sigma, .)>; one for every policy.
double psi_mass_check(const PolicySpec& policy, const Pmf& sigma);

/// max_j |h p_j - Psi(empirical(loads), l_j)|.
double finite_n_vs_psi_gap(const PolicySpec& policy, std::span<const Load> loads);

}  // namespace urnfield
