#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "urnfield/common.hpp"

namespace urnfield {

/// Finitely supported probability distribution on {0, 1, 2, ...}.
///
/// Entry k is P(X = k); everything beyond `size()` has probability zero.
/// Trailing zeros are trimmed, so `size()` is one past the largest atom.
class Pmf {
 public:
  /// Tolerance on |sum - 1| accepted by the validating constructor.
  static constexpr double kSumTolerance = 1e-9;

  /// Dirac mass at 0.
  Pmf();

  /// Validates and takes ownership of `probs`. Entries in (-tol, 0) are
  /// clamped to zero (round-off from integrators); anything more negative,
  /// non-finite, or a total off by more than `tol` throws std::invalid_argument.
  explicit Pmf(std::vector<double> probs, double tol = kSumTolerance);

  static Pmf dirac(std::size_t k);

  /// Normalizes non-negative weights.
  static Pmf from_weights(std::vector<double> weights);

  /// Histogram of `loads`, normalized.
  static Pmf empirical(std::span<const Load> loads);

  static Pmf from_counts(std::span<const std::uint64_t> counts);

  double operator[](std::size_t k) const noexcept { return k < probs_.size() ? probs_[k] : 0.0; }

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }

  double total() const noexcept;
  double mean() const noexcept;

  /// P(X >= k).
  double survival(std::size_t k) const noexcept;

  /// P(X <= k).
  double cdf(std::size_t k) const noexcept;

  /// Drops trailing atoms whose combined mass is below `threshold` and
  /// renormalizes.
  Pmf trimmed(double threshold) const;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

}  // namespace urnfield
