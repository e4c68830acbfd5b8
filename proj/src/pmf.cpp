#include "urnfield/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace urnfield {

namespace {

void trim_zeros(std::vector<double>& probs) {
  while (!probs.empty() && probs.back() == 0.0) probs.pop_back();
}

}  // namespace

Pmf::Pmf() : probs_{1.0} {}

Pmf::Pmf(std::vector<double> probs, double tol) : probs_(std::move(probs)) {
  double sum = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    double& p = probs_[k];
    if (!std::isfinite(p) || p <= -tol)
      throw std::invalid_argument("Pmf: invalid probability at " + std::to_string(k));
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("Pmf: probabilities sum to " + std::to_string(sum));
  trim_zeros(probs_);
}

Pmf Pmf::dirac(std::size_t k) {
  std::vector<double> probs(k + 1, 0.0);
  probs[k] = 1.0;
  return Pmf(std::move(probs));
}

Pmf Pmf::from_weights(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Pmf: negative weight");
    sum += w;
  }
  if (sum <= 0.0) throw std::invalid_argument("Pmf: weights sum to zero");
  for (double& w : weights) w /= sum;
  return Pmf(std::move(weights));
}

Pmf Pmf::empirical(std::span<const Load> loads) {
  if (loads.empty()) throw std::invalid_argument("Pmf: empty sample");
  const Load top = *std::max_element(loads.begin(), loads.end());
  if (*std::min_element(loads.begin(), loads.end()) < 0)
    throw std::invalid_argument("Pmf: negative load");
  std::vector<double> probs(static_cast<std::size_t>(top) + 1, 0.0);
  for (Load l : loads) probs[static_cast<std::size_t>(l)] += 1.0;
  const double n = static_cast<double>(loads.size());
  for (double& p : probs) p /= n;
  return Pmf(std::move(probs));
}

Pmf Pmf::from_counts(std::span<const std::uint64_t> counts) {
  std::vector<double> weights(counts.begin(), counts.end());
  return from_weights(std::move(weights));
}

double Pmf::total() const noexcept { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

double Pmf::mean() const noexcept {
  double m = 0.0;
  for (std::size_t k = 1; k < probs_.size(); ++k) m += static_cast<double>(k) * probs_[k];
  return m;
}

double Pmf::survival(std::size_t k) const noexcept {
  double s = 0.0;
  for (std::size_t j = probs_.size(); j > k; --j) s += probs_[j - 1];
  return s;
}

double Pmf::cdf(std::size_t k) const noexcept {
  double s = 0.0;
  const std::size_t end = std::min(k + 1, probs_.size());
  for (std::size_t j = 0; j < end; ++j) s += probs_[j];
  return s;
}

Pmf Pmf::trimmed(double threshold) const {
  std::vector<double> probs = probs_;
  double tail = 0.0;
  while (probs.size() > 1 && tail + probs.back() < threshold) {
    tail += probs.back();
    probs.pop_back();
  }
  if (tail == 0.0) return *this;
  return from_weights(std::move(probs));
}

}  // namespace urnfield
