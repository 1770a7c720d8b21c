#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "heavytail/errors.hpp"
#include "heavytail/linalg.hpp"

namespace hte {

struct OdeOptions {
  /// Local error target per step (mixed absolute/relative).
  double tol = 1e-8;
  double initial_step = 0.0;  ///< 0: 1% of the interval
  long long max_steps = 200'000;
  /// State norm beyond which the solution is treated as escaping to infinity.
  double escape_norm = 1e8;
  /// Optional early termination once the predicate holds for an accepted state.
  std::function<bool(const Vec&)> stop_when;
};

struct OdeResult {
  Vec y;
  double t = 0.0;
  bool stopped_early = false;
  long long steps = 0;
  long long rejected = 0;
};

/// Dormand–Prince 5(4) with embedded error control. Throws IntegrationFailure
/// carrying the accepted states on step-size underflow, escape or step exhaustion.
template <class Rhs>
OdeResult integrate_adaptive(Rhs&& rhs, const Vec& y0, double t0, double t1,
                             const OdeOptions& opt = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeResult res;
  res.y = y0;
  res.t = t0;
  std::vector<Vec> accepted{y0};
  const double span = t1 - t0;
  if (span == 0.0) return res;
  const double dir = span > 0 ? 1.0 : -1.0;
  double h = opt.initial_step > 0 ? dir * std::min(opt.initial_step, std::abs(span)) : 0.01 * span;

  Vec k1 = rhs(res.t, res.y);
  while (dir * (t1 - res.t) > 0) {
    if (res.steps + res.rejected >= opt.max_steps)
      throw IntegrationFailure("ode: step budget exhausted", std::move(accepted));
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(res.t)))
      throw IntegrationFailure("ode: step size underflow", std::move(accepted));
    if (dir * (res.t + h - t1) > 0) h = t1 - res.t;

    const Vec& y = res.y;
    const Vec k2 = rhs(res.t + c2 * h, y + h * (a21 * k1));
    const Vec k3 = rhs(res.t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(res.t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs(res.t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = rhs(res.t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(res.t + h, y_new);
    const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    bool finite = y_new.allFinite() && err_vec.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale = opt.tol * std::max({1.0, std::abs(y(i)), std::abs(y_new(i))});
        err = std::max(err, std::abs(err_vec(i)) / scale);
      }
    }
    if (!finite || err > 1.0) {
      ++res.rejected;
      const double shrink = finite ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= shrink;
      continue;
    }
    res.t += h;
    res.y = y_new;
    k1 = k7;
    ++res.steps;
    accepted.push_back(res.y);
    if (res.y.norm() > opt.escape_norm)
      throw IntegrationFailure("ode: solution escapes to infinity", std::move(accepted));
    if (opt.stop_when && opt.stop_when(res.y)) {
      res.stopped_early = true;
      return res;
    }
    const double grow = err > 0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    h *= grow;
  }
  return res;
}

}  // namespace hte
