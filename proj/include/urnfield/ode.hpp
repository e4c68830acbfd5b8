#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace urnfield {

struct OdeOptions {
  double atol = 1e-10;
  double rtol = 0.0;
  double initial_step = 1e-3;
  double max_step = 0.25;
  double min_step = 1e-12;
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Explicit Dormand-Prince 5(4) pair with adaptive step size.
class DormandPrince45 {
 public:
  using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
  /// Extra acceptance test on a candidate state; returning false rejects the step.
  using Admissible = std::function<bool(std::span<const double> y)>;

  DormandPrince45(Rhs rhs, std::size_t dim, OdeOptions options = {});

  /// Advances (t, y) to t_end. Throws StepFailure when the step size
  /// collapses below min_step or the step budget runs out.
  void advance(std::vector<double>& y, double& t, double t_end, const Admissible& admissible = {});

  const OdeStats& stats() const noexcept { return stats_; }
  double step_size() const noexcept { return h_; }

 private:
  Rhs rhs_;
  OdeOptions options_;
  OdeStats stats_;
  double h_;
  std::vector<std::vector<double>> k_;
  std::vector<double> stage_;
  std::vector<double> next_;
};

}  // namespace urnfield
