#include "urnfield/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "urnfield/common.hpp"

namespace urnfield {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

DormandPrince45::DormandPrince45(Rhs rhs, std::size_t dim, OdeOptions options)
    : rhs_(std::move(rhs)),
      options_(options),
      h_(options.initial_step),
      k_(7, std::vector<double>(dim)),
      stage_(dim),
      next_(dim) {}

void DormandPrince45::advance(std::vector<double>& y, double& t, double t_end, const Admissible& admissible) {
  const std::size_t n = y.size();
  if (!(t_end > t)) return;
  auto& k1 = k_[0];
  auto& k2 = k_[1];
  auto& k3 = k_[2];
  auto& k4 = k_[3];
  auto& k5 = k_[4];
  auto& k6 = k_[5];
  auto& k7 = k_[6];
  rhs_(t, y, k1);

  while (t < t_end) {
    if (stats_.accepted + stats_.rejected >= options_.max_steps)
      throw StepFailure("step budget exhausted at t = " + std::to_string(t));
    h_ = std::min(h_, options_.max_step);
    bool last = false;
    double h = h_;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * a21 * k1[i];
    rhs_(t + c2 * h, stage_, k2);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs_(t + c3 * h, stage_, k3);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs_(t + c4 * h, stage_, k4);
    for (std::size_t i = 0; i < n; ++i)
      stage_[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs_(t + c5 * h, stage_, k5);
    for (std::size_t i = 0; i < n; ++i)
      stage_[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs_(t + h, stage_, k6);
    for (std::size_t i = 0; i < n; ++i)
      next_[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs_(t + h, next_, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = options_.atol + options_.rtol * std::max(std::abs(y[i]), std::abs(next_[i]));
      err = std::max(err, std::abs(e) / scale);
    }

    const bool ok = std::isfinite(err) && err <= 1.0 && (!admissible || admissible(next_));
    if (ok) {
      ++stats_.accepted;
      t = last ? t_end : t + h;
      y.swap(next_);
      k1.swap(k7);
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      // Keep the controller's step when the grid forced a short one.
      if (!last || h >= h_) h_ = h * std::clamp(grow, 0.2, 5.0);
    } else {
      ++stats_.rejected;
      const double shrink = std::isfinite(err) && err > 1.0 ? 0.9 * std::pow(err, -0.2) : 0.5;
      h_ = h * std::clamp(shrink, 0.1, 0.5);
      if (h_ < options_.min_step) throw StepFailure("step size underflow at t = " + std::to_string(t));
    }
  }
}

}  // namespace urnfield
