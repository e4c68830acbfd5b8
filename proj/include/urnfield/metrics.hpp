#pragma once

#include <optional>
#include <span>

#include "urnfield/pmf.hpp"

namespace urnfield {

/// Total variation distance, (1/2) sum_k |a(k) - b(k)|.
double tv(const Pmf& a, const Pmf& b);

/// W_p through the quantile coupling, which is optimal on the real line.
double wasserstein(const Pmf& a, const Pmf& b, double p);

/// W_1 as sum_k |F_a(k) - F_b(k)|.
double wasserstein1_cdf(const Pmf& a, const Pmf& b);

/// max over grid times of tv(a[t], b[t]). Throws std::invalid_argument on
/// length mismatch.
double sup_time_tv(std::span<const Pmf> a, std::span<const Pmf> b);

/// max over grid times of |<a[t], I> - <b[t], I>|.
double sup_time_mean_gap(std::span<const Pmf> a, std::span<const Pmf> b);

struct DistanceReport {
  double tv = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  std::optional<double> sup_time_tv;
};

DistanceReport distance_report(const Pmf& a, const Pmf& b);

}  // namespace urnfield
