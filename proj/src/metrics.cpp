#include "urnfield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace urnfield {

namespace {

constexpr double kTrim = 1e-15;

}  // namespace

double tv(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

double wasserstein(const Pmf& a_in, const Pmf& b_in, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein: p must be at least 1");
  const Pmf a = a_in.trimmed(kTrim);
  const Pmf b = b_in.trimmed(kTrim);
  // Walk both quantile functions together; each piece of [0,1] where both
  // are constant contributes its length times |x_a - x_b|^p.
  std::size_t i = 0, j = 0;
  double left_a = a[0], left_b = b[0];
  double cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(left_a, left_b);
    if (m > 0.0) cost += m * std::pow(std::abs(static_cast<double>(i) - static_cast<double>(j)), p);
    left_a -= m;
    left_b -= m;
    if (left_a <= 0.0 && ++i < a.size()) left_a = a[i];
    if (left_b <= 0.0 && ++j < b.size()) left_b = b[j];
  }
  return std::pow(cost, 1.0 / p);
}

double wasserstein1_cdf(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double fa = 0.0, fb = 0.0, s = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    fa += a[k];
    fb += b[k];
    s += std::abs(fa - fb);
  }
  return s;
}

double sup_time_tv(std::span<const Pmf> a, std::span<const Pmf> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_time_tv: grid mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s = std::max(s, tv(a[t], b[t]));
  return s;
}

double sup_time_mean_gap(std::span<const Pmf> a, std::span<const Pmf> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_time_mean_gap: grid mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s = std::max(s, std::abs(a[t].mean() - b[t].mean()));
  return s;
}

DistanceReport distance_report(const Pmf& a, const Pmf& b) {
  return {tv(a, b), wasserstein(a, b, 1.0), wasserstein(a, b, 2.0), std::nullopt};
}

}  // namespace urnfield
