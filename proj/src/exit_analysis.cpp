#include "heavytail/exit_analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "heavytail/errors.hpp"
#include "heavytail/ode.hpp"

namespace hte {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool marcus_exits(const ExitSetSpec& spec, const Vec& z) {
  const int n = spec.field.rows();
  const Vec origin = Vec::Zero(n);
  if (z.isZero(0.0)) return !spec.domain.contains(origin);
  if (spec.field.is_constant()) return !spec.domain.contains(spec.field.value(origin) * z);
  OdeOptions opt;
  opt.tol = 0.01 * spec.flow_tol;  // same margin as flow_phi
  opt.max_steps = 50'000;
  // A scalar flow is monotone, so the endpoint is outside G as soon as the path is.
  if (n == 1) opt.stop_when = [&](const Vec& y) { return !spec.domain.contains(y); };
  auto rhs = [&](double, const Vec& y) -> Vec { return spec.field.value(y) * z; };
  try {
    return !spec.domain.contains(integrate_adaptive(rhs, origin, 0.0, 1.0, opt).y);
  } catch (const IntegrationFailure& fail) {
    for (const Vec& y : fail.partial_trajectory())
      if (!spec.domain.contains(y)) return true;
    return false;
  }
}

std::vector<Vec> probe_directions(int m) {
  std::vector<Vec> dirs;
  if (m == 1) {
    dirs.push_back(vec({1.0}));
    dirs.push_back(vec({-1.0}));
    return dirs;
  }
  if (m == 2) {
    for (int k = 0; k < 64; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 64;
      dirs.push_back(vec({std::cos(phi), std::sin(phi)}));
    }
    return dirs;
  }
  Rng rng(0x5eed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 64 * m; ++k) {
    Vec d(m);
    for (int i = 0; i < m; ++i) d(i) = normal(rng);
    dirs.push_back(d.normalized());
  }
  for (int i = 0; i < m; ++i) {
    Vec e = Vec::Zero(m);
    e(i) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  return dirs;
}

}  // namespace

bool exit_indicator(const ExitSetSpec& spec, const Vec& z) {
  if (spec.variant == ExitSetSpec::Variant::ito_strat) {
    const Vec origin = Vec::Zero(spec.field.rows());
    return !spec.domain.contains(spec.field.value(origin) * z);
  }
  return marcus_exits(spec, z);
}

double exit_radius(const ExitSetSpec& spec, const Vec& dir, double r_max) {
  double lo = 0.0;
  double hi = 1e-3;
  while (!exit_indicator(spec, hi * dir)) {
    lo = hi;
    hi *= 2.0;
    if (hi > r_max) return kInf;
  }
  for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (exit_indicator(spec, mid * dir) ? hi : lo) = mid;
  }
  return hi;
}

ExitSetSpec ExitSetSpec::make(const System& system, Variant variant, double flow_tol) {
  system.validate();
  ExitSetSpec spec{variant, system.field, system.domain, flow_tol, 0.0};
  const int m = system.field.cols();
  const auto dirs = probe_directions(m);
  double best = kInf;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const double r = exit_radius(spec, dirs[k]);
    if (r < best) {
      best = r;
      best_k = k;
    }
  }
  if (m == 2 && std::isfinite(best)) {
    // Golden-section refinement of r*(phi) within one grid cell either side.
    const double phi0 = 2.0 * std::numbers::pi * static_cast<double>(best_k) / 64;
    const double width = 2.0 * std::numbers::pi / 64;
    auto r_at = [&](double phi) { return exit_radius(spec, vec({std::cos(phi), std::sin(phi)})); };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = phi0 - width, hi = phi0 + width;
    double p1 = hi - g * (hi - lo), p2 = lo + g * (hi - lo);
    double r1 = r_at(p1), r2 = r_at(p2);
    for (int it = 0; it < 40; ++it) {
      if (r1 < r2) {
        hi = p2; p2 = p1; r2 = r1; p1 = hi - g * (hi - lo); r1 = r_at(p1);
      } else {
        lo = p1; p1 = p2; r1 = r2; p2 = lo + g * (hi - lo); r2 = r_at(p2);
      }
    }
    best = std::min({best, r1, r2});
  }
  // Margin for directions between probes.
  spec.r_min = std::isfinite(best) ? 0.95 * best : kInf;
  return spec;
}

RegionIndicator ExitSetSpec::region() const {
  return {[spec = *this](const Vec& z) { return exit_indicator(spec, z); }, r_min};
}

RateEstimate predicted_rate(const ExitSetSpec& spec, const LevyModel& model, double eps,
                            double precision, Rng& rng, MeasureMethod method) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("predicted_rate: eps must lie in (0, 1]");
  RateEstimate est;
  if (!std::isfinite(spec.r_min)) throw HypothesisViolation("exit set " + spec.name() + " is empty on every probed ray: m(E) = 0");
  const bool quad = method == MeasureMethod::quadrature ||
                    (method == MeasureMethod::automatic && model.dimension() <= 2);
  Estimate m = quad ? limit_measure_quadrature(model, spec.region())
                    : limit_measure(model, spec.region(), precision, rng);
  if (!(m.value > 3.0 * m.stderr_) || m.value <= 0.0)
    throw HypothesisViolation("m(" + spec.name() + ") is indistinguishable from zero");
  const double h = model.tail(1.0 / eps);
  est.m = m.value;
  est.m_stderr = m.stderr_;
  est.lambda = m.value * h;
  est.lambda_stderr = m.stderr_ * h;
  return est;
}

// -------------------------------------------------------------- Reduction1D

Reduction1D::Reduction1D(const System& system, int table_size)
    : field_(system.field), potential_(system.potential) {
  system.validate();
  if (system.n() != 1 || system.m() != 1) throw PreconditionError("reduce_1d: requires n = m = 1");
  if (table_size < 16) throw PreconditionError("reduce_1d: table too small");
  a_ = -system.domain.lower()(0);
  b_ = system.domain.upper()(0);
  if (!(a_ > 0.0 && b_ > 0.0)) throw PreconditionError("reduce_1d: domain must be (-a, b) with a, b > 0");

  dx_ = (a_ + b_) / table_size;
  double fmin = kInf;
  for (int k = 0; k <= 4 * table_size; ++k) {
    const double x = -a_ + 0.25 * dx_ * k;
    fmin = std::min(fmin, field_.value(vec({x}))(0, 0));
  }
  if (!(fmin > 0.0)) throw PreconditionError("reduce_1d: F must be strictly positive on [-a, b] (ellipticity)");

  auto inv_F = [&](double y) { return 1.0 / field_.value(vec({y}))(0, 0); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  f_nodes_.assign(static_cast<std::size_t>(table_size) + 1, 0.0);
  // Integrate outward from the node nearest to 0 so that f(0) = 0 exactly.
  std::vector<double> cum(f_nodes_.size(), 0.0);
  for (int k = 1; k <= table_size; ++k) {
    const double x0 = -a_ + dx_ * (k - 1);
    cum[k] = cum[k - 1] + GK::integrate(inv_F, x0, x0 + dx_, 5, 1e-14);
  }
  const int k0 = static_cast<int>(std::floor(a_ / dx_));
  const double x_k0 = -a_ + dx_ * k0;
  const double offset = cum[k0] + GK::integrate(inv_F, x_k0, 0.0, 5, 1e-14);
  for (std::size_t k = 0; k < f_nodes_.size(); ++k) f_nodes_[k] = cum[k] - offset;

  y_lo_ = f(-a_);
  y_hi_ = f(b_);
  dy_ = (y_hi_ - y_lo_) / table_size;
  inv_nodes_.resize(static_cast<std::size_t>(table_size) + 1);
  for (int j = 0; j <= table_size; ++j) inv_nodes_[j] = f_inverse(y_lo_ + dy_ * j);
}

double Reduction1D::hermite_f(double x) const {
  const int n = static_cast<int>(f_nodes_.size()) - 1;
  double s = (x + a_) / dx_;
  int k = static_cast<int>(std::floor(s));
  k = std::clamp(k, 0, n - 1);
  const double t = s - k;
  const double x0 = -a_ + dx_ * k;
  const double d0 = 1.0 / field_.value(vec({x0}))(0, 0);
  const double d1 = 1.0 / field_.value(vec({x0 + dx_}))(0, 0);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * f_nodes_[k] + h10 * dx_ * d0 + h01 * f_nodes_[k + 1] + h11 * dx_ * d1;
}

double Reduction1D::f(double x) const {
  if (x < -a_ || x > b_) {
    // Outside the tabulated range integrate directly from the nearest end.
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto inv_F = [&](double y) { return 1.0 / field_.value(vec({y}))(0, 0); };
    if (x < -a_) return hermite_f(-a_) - GK::integrate(inv_F, x, -a_, 10, 1e-14);
    return hermite_f(b_) + GK::integrate(inv_F, b_, x, 10, 1e-14);
  }
  return hermite_f(x);
}

double Reduction1D::f_inverse(double y) const {
  double lo = -a_, hi = b_;
  // Expand the bracket when y lies beyond the tabulated image.
  while (f(lo) > y) lo -= (b_ + a_);
  while (f(hi) < y) hi += (b_ + a_);
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Reduction1D::f_inverse_fast(double y) const {
  const int n = static_cast<int>(inv_nodes_.size()) - 1;
  const double s = (y - y_lo_) / dy_;
  if (s < 0.0 || s > n) return f_inverse(y);
  int j = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
  const double t = s - j;
  const double x0 = inv_nodes_[j], x1 = inv_nodes_[j + 1];
  // (f^{-1})' = F(f^{-1}).
  const double d0 = field_.value(vec({x0}))(0, 0), d1 = field_.value(vec({x1}))(0, 0);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * x0 + h10 * dy_ * d0 + h01 * x1 + h11 * dy_ * d1;
}

double Reduction1D::effective_drift(double y) const {
  const Vec x = vec({f_inverse_fast(y)});
  return -potential_.gradient(x)(0) / field_.value(x)(0, 0);
}

double Reduction1D::rate_factor(double alpha) const {
  const auto [lo, hi] = boundaries();
  return 0.5 * (std::pow(std::abs(lo), -alpha) + std::pow(hi, -alpha));
}

double Reduction1D::predicted_rate(const LevyModel& model, double eps) const {
  if (model.dimension() != 1 || !model.symmetric())
    throw PreconditionError("reduce_1d: rate formula needs a symmetric one-dimensional model");
  if (!(eps > 0.0)) throw DomainError("reduce_1d: eps must be positive");
  return rate_factor(model.alpha()) * model.tail(1.0 / eps);
}

System Reduction1D::reduced_system() const {
  auto self = std::make_shared<Reduction1D>(*this);
  auto grad = [self](const Vec& y) -> Vec { return vec({-self->effective_drift(y(0))}); };
  auto value = [self](const Vec& y) -> double {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    if (y(0) == 0.0) return 0.0;
    return GK::integrate([&](double v) { return -self->effective_drift(v); }, 0.0, y(0), 10, 1e-12);
  };
  const auto [lo, hi] = boundaries();
  return System{Potential::custom(1, value, grad, "reduced_1d"), NoiseField::constant(Mat::Constant(1, 1, 1.0)),
                Domain::box(vec({lo}), vec({hi}))};
}

}  // namespace hte
