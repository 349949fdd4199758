#pragma once

// Adaptive Dormand-Prince 5(4) integrator for linear/nonlinear systems whose
// state is an Eigen vector (real or complex). Error control is the usual
// scaled RMS norm with per-component tolerance atol + rtol * max(|y|, |y_new|).

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "darkcool/error.hpp"

namespace darkcool::ode {

struct Options {
  double rtol = 1e-8;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: pick from the RHS scale
  double max_step = 0.0;      // 0: unlimited
  long max_steps = 50'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
};

/// Integrates y' = rhs(t, y) from t0 to t1. `observer(t, y)` is called after
/// every accepted step. Stops exactly at t1. Throws StiffnessFailure when the
/// step size underflows.
template <class Vector, class Rhs, class Observer>
Stats integrate(Rhs&& rhs, Vector& y, double t0, double t1, const Options& opt,
                Observer&& observer) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Stats stats;
  const double span = t1 - t0;
  if (span == 0.0) return stats;
  if (span < 0.0) throw DomainError("ode::integrate requires t1 >= t0");

  auto err_norm = [&](const Vector& err, const Vector& a, const Vector& b) {
    const auto scale = (opt.atol + opt.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array());
    return std::sqrt((err.cwiseAbs().array() / scale).square().mean());
  };

  Vector k1 = rhs(t0, y);
  double h = opt.initial_step;
  if (h <= 0.0) {
    const double d0 = err_norm(y, y, y);
    const double d1 = err_norm(k1, y, y);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  double t = t0;
  Vector k2, k3, k4, k5, k6, k7, y_new, err;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      std::ostringstream os;
      os << "integrator exceeded " << opt.max_steps << " steps (t reached " << t << ")";
      throw StiffnessFailure(os.str(), t);
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "stiffness failure: step size underflow at t = " << t;
      throw StiffnessFailure(os.str(), t);
    }
    k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, y_new);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = err_norm(err, y, y_new);
    if (!std::isfinite(en)) {
      h *= 0.25;
      ++stats.rejected;
      continue;
    }
    if (en <= 1.0) {
      t = last ? t1 : t + h;
      y = y_new;
      k1 = k7;  // first-same-as-last
      ++stats.accepted;
      observer(t, static_cast<const Vector&>(y));
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.25));
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  }
  return stats;
}

template <class Vector, class Rhs>
Stats integrate(Rhs&& rhs, Vector& y, double t0, double t1, const Options& opt) {
  return integrate(std::forward<Rhs>(rhs), y, t0, t1, opt, [](double, const Vector&) {});
}

}  // namespace darkcool::ode
