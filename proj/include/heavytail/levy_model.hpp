#pragma once

#include <functional>
#include <string>
#include <utility>

#include "heavytail/linalg.hpp"
#include "heavytail/random.hpp"

namespace hte {

enum class LevyVariant {
  isotropic_stable,
  onedim_symmetric_stable,
  compound_poisson_pareto,
  brownian,  ///< no jump part; used for continuous-noise validation
};

/// Angular part of the jump measure.
enum class Spectral {
  isotropic,  ///< uniform on the unit sphere (±1 with equal weight when m = 1)
  one_sided,  ///< concentrated on the first coordinate axis, +e1
};

std::string to_string(LevyVariant v);
LevyVariant parse_levy_variant(const std::string& s);
std::string to_string(Spectral s);
Spectral parse_spectral(const std::string& s);

/// Set of jump values z in R^m, bounded away from the origin.
struct RegionIndicator {
  std::function<bool(const Vec&)> contains;
  /// ||z|| < r_min implies z is not in the region.
  double r_min = 0.0;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct SmallJumpMoments {
  Vec drift;                      ///< integral of z over 1 < ||z|| <= threshold
  std::function<Mat(double)> proxy_cov;  ///< delta -> integral of z z^T over ||z|| <= delta
};

/// Heavy-tailed Lévy process with characteristic triplet (A, nu, mu).
///
/// The jump measure nu is one of a small catalog with closed-form tail
/// H(u) = nu(||z|| >= u):
///  - isotropic_stable:        nu(dz) = c ||z||^{-m-alpha} dz on R^m
///  - onedim_symmetric_stable: nu(dz) = c |z|^{-1-alpha} dz on R
///  - compound_poisson_pareto: rate * Pareto(alpha) radii >= 1, directions per Spectral
///
/// Immutable after construction.
class LevyModel {
 public:
  static LevyModel isotropic_stable(int m, double alpha, double c, Mat brownian_cov = {},
                                    Vec drift = {});
  static LevyModel onedim_symmetric_stable(double alpha, double c, double brownian_var = 0.0,
                                           double drift = 0.0);
  static LevyModel compound_poisson_pareto(int m, double alpha, double rate, Spectral spectral,
                                           Mat brownian_cov = {}, Vec drift = {});
  /// Pure Brownian motion with covariance A and drift mu; no jumps at all.
  static LevyModel brownian(Mat brownian_cov, Vec drift = {});

  int dimension() const { return m_; }
  LevyVariant variant() const { return variant_; }
  Spectral spectral() const { return spectral_; }
  double alpha() const { return alpha_; }
  /// Scale c for stable variants, total jump rate for compound Poisson.
  double scale() const { return scale_; }
  /// Tail index r of H; equals alpha for every catalog variant.
  double tail_index() const { return alpha_; }
  const Mat& brownian_cov() const { return A_; }
  const Vec& drift() const { return mu_; }
  bool has_jumps() const { return scale_ > 0.0; }
  bool symmetric() const { return spectral_ == Spectral::isotropic; }

  /// H(u) = nu(||z|| >= u).
  double tail(double u) const;

  /// Poisson rate of jumps with ||z|| >= threshold.
  double big_jump_rate(double threshold) const;

  /// One jump from nu restricted to ||z|| >= threshold, normalised.
  Vec sample_big_jump(double threshold, Rng& rng) const;

  /// Radius from nu's radial law restricted to ||z|| >= threshold.
  double sample_radius(double threshold, Rng& rng) const;
  /// Direction from the spectral measure.
  Vec sample_direction(Rng& rng) const;

  /// Integral of z nu(dz) over lo <= ||z|| < hi (zero for symmetric models).
  Vec first_moment(double lo, double hi) const;

  /// Drift mu_eps and the Gaussian proxy covariance for compensated small jumps.
  SmallJumpMoments small_jump_moments(double threshold) const;
  Mat gaussian_proxy_cov(double delta) const;

  /// E[theta theta^T] for the spectral direction theta.
  Mat direction_second_moment() const;
  /// E[theta].
  Vec direction_mean() const;

 private:
  LevyModel() = default;
  void validate() const;

  LevyVariant variant_ = LevyVariant::isotropic_stable;
  Spectral spectral_ = Spectral::isotropic;
  int m_ = 1;
  double alpha_ = 1.0;
  double scale_ = 1.0;
  Mat A_;
  Vec mu_;
};

/// Scaling limit measure m(region) = lim nu(u region) / H(u) by importance-sampled
/// Monte Carlo: radii from the Pareto law above region.r_min, directions from the
/// spectral measure. Runs until stderr <= precision or the sample budget is spent.
Estimate limit_measure(const LevyModel& model, const RegionIndicator& region, double precision,
                       Rng& rng, long long max_samples = 50'000'000);

/// Same quantity by deterministic quadrature over (direction, s = r^{-alpha}).
/// Supported for m = 1 and m = 2. `stderr_` holds the difference to the
/// half-resolution rule.
Estimate limit_measure_quadrature(const LevyModel& model, const RegionIndicator& region,
                                  int n_angles = 4096, int n_radial = 48);

/// Surface area of the unit sphere in R^m.
double unit_sphere_area(int m);

}  // namespace hte
