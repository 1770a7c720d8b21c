#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/levy_model.hpp"
#include "heavytail/system.hpp"

namespace hte {

/// Jump values z that, applied at the attractor, leave G:
///   ito_strat: F(0) z not in G
///   marcus:    phi^z(0) not in G
struct ExitSetSpec {
  enum class Variant { ito_strat, marcus };
  Variant variant = Variant::ito_strat;
  NoiseField field;
  Domain domain;
  double flow_tol = 1e-8;
  /// Lower bound on ||z|| over the set; +inf when the set is empty on every probed ray.
  double r_min = 0.0;

  /// Builds the spec and locates r_min by ray bisection over a 64-direction
  /// grid, refined around the minimising direction.
  static ExitSetSpec make(const System& system, Variant variant, double flow_tol = 1e-8);

  RegionIndicator region() const;
  std::string name() const { return variant == Variant::marcus ? "marcus" : "ito_strat"; }
};

bool exit_indicator(const ExitSetSpec& spec, const Vec& z);

/// Smallest r > 0 with exit_indicator(r * dir); +inf if none up to r_max.
double exit_radius(const ExitSetSpec& spec, const Vec& dir, double r_max = 1e8);

struct RateEstimate {
  double lambda = 0.0;
  double lambda_stderr = 0.0;
  double m = 0.0;
  double m_stderr = 0.0;
  double mean_exit_time() const { return 1.0 / lambda; }
};

enum class MeasureMethod { automatic, monte_carlo, quadrature };

/// lambda_eps = m(E) H(1/eps). Throws HypothesisViolation when m(E) is
/// indistinguishable from zero at three standard errors.
RateEstimate predicted_rate(const ExitSetSpec& spec, const LevyModel& model, double eps,
                            double precision, Rng& rng,
                            MeasureMethod method = MeasureMethod::monte_carlo);

/// Change of variables y = f(x) = int_0^x dy / F(y) turning a 1-D Marcus
/// equation with uniformly elliptic F into one with additive noise.
class Reduction1D {
 public:
  /// Requires n = m = 1, G = (-a, b) and F >= f_min > 0 on [-a, b].
  explicit Reduction1D(const System& system, int table_size = 4096);

  double f(double x) const;
  /// Monotone bisection to 1e-10.
  double f_inverse(double y) const;
  /// Table-interpolated inverse used on hot paths.
  double f_inverse_fast(double y) const;
  /// B(y) = -(U'/F)(f^{-1}(y)).
  double effective_drift(double y) const;

  double a() const { return a_; }
  double b() const { return b_; }
  /// (f(-a), f(b)).
  std::pair<double, double> boundaries() const { return {f(-a_), f(b_)}; }
  /// M = (|f(-a)|^{-alpha} + f(b)^{-alpha}) / 2.
  double rate_factor(double alpha) const;
  /// M * H(1/eps) for a symmetric one-dimensional stable model.
  double predicted_rate(const LevyModel& model, double eps) const;

  /// The additive-noise system for Y = f(X): drift B, F = 1, G = (f(-a), f(b)).
  System reduced_system() const;

 private:
  double hermite_f(double x) const;

  NoiseField field_;
  Potential potential_;
  double a_ = 1.0;
  double b_ = 1.0;
  double dx_ = 0.0;
  std::vector<double> f_nodes_;   // f on a uniform x grid over [-a, b]
  double y_lo_ = 0.0, y_hi_ = 0.0, dy_ = 0.0;
  std::vector<double> inv_nodes_;  // f^{-1} on a uniform y grid
};

}  // namespace hte
