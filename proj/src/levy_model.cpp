#include "heavytail/levy_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heavytail/errors.hpp"

namespace hte {

std::string to_string(LevyVariant v) {
  switch (v) {
    case LevyVariant::isotropic_stable: return "isotropic_stable";
    case LevyVariant::onedim_symmetric_stable: return "onedim_symmetric_stable";
    case LevyVariant::compound_poisson_pareto: return "compound_poisson_pareto";
    case LevyVariant::brownian: return "brownian";
  }
  return "unknown";
}

LevyVariant parse_levy_variant(const std::string& s) {
  if (s == "isotropic_stable") return LevyVariant::isotropic_stable;
  if (s == "onedim_symmetric_stable") return LevyVariant::onedim_symmetric_stable;
  if (s == "compound_poisson_pareto") return LevyVariant::compound_poisson_pareto;
  if (s == "brownian") return LevyVariant::brownian;
  throw ConfigError("levy.variant", "unknown variant '" + s + "'");
}

std::string to_string(Spectral s) { return s == Spectral::isotropic ? "isotropic" : "one_sided"; }

Spectral parse_spectral(const std::string& s) {
  if (s == "isotropic") return Spectral::isotropic;
  if (s == "one_sided") return Spectral::one_sided;
  throw ConfigError("levy.spectral", "unknown spectral measure '" + s + "'");
}

double unit_sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

namespace {

Mat default_cov(Mat A, int m) {
  if (A.size() == 0) return Mat::Zero(m, m);
  return A;
}

Vec default_drift(Vec mu, int m) {
  if (mu.size() == 0) return Vec::Zero(m);
  return mu;
}

// Integral of r^p * alpha * r^{-alpha-1} dr over [lo, hi).
double radial_power_integral(double p, double alpha, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const double e = p - alpha;
  if (std::abs(e) < 1e-12) return alpha * std::log(hi / lo);
  if (std::isinf(hi)) {
    if (e >= 0) return std::numeric_limits<double>::infinity();
    return alpha * -std::pow(lo, e) / e;
  }
  return alpha * (std::pow(hi, e) - std::pow(lo, e)) / e;
}

}  // namespace

LevyModel LevyModel::isotropic_stable(int m, double alpha, double c, Mat brownian_cov, Vec drift) {
  LevyModel model;
  model.variant_ = LevyVariant::isotropic_stable;
  model.m_ = m;
  model.alpha_ = alpha;
  model.scale_ = c;
  model.A_ = default_cov(std::move(brownian_cov), m);
  model.mu_ = default_drift(std::move(drift), m);
  model.validate();
  return model;
}

LevyModel LevyModel::onedim_symmetric_stable(double alpha, double c, double brownian_var,
                                             double drift) {
  LevyModel model;
  model.variant_ = LevyVariant::onedim_symmetric_stable;
  model.m_ = 1;
  model.alpha_ = alpha;
  model.scale_ = c;
  model.A_ = Mat::Constant(1, 1, brownian_var);
  model.mu_ = Vec::Constant(1, drift);
  model.validate();
  return model;
}

LevyModel LevyModel::compound_poisson_pareto(int m, double alpha, double rate, Spectral spectral,
                                             Mat brownian_cov, Vec drift) {
  LevyModel model;
  model.variant_ = LevyVariant::compound_poisson_pareto;
  model.spectral_ = spectral;
  model.m_ = m;
  model.alpha_ = alpha;
  model.scale_ = rate;
  model.A_ = default_cov(std::move(brownian_cov), m);
  model.mu_ = default_drift(std::move(drift), m);
  model.validate();
  return model;
}

LevyModel LevyModel::brownian(Mat brownian_cov, Vec drift) {
  LevyModel model;
  model.variant_ = LevyVariant::brownian;
  model.m_ = static_cast<int>(brownian_cov.rows());
  model.alpha_ = 1.0;
  model.scale_ = 0.0;
  model.A_ = std::move(brownian_cov);
  model.mu_ = default_drift(std::move(drift), model.m_);
  model.validate();
  return model;
}

void LevyModel::validate() const {
  if (m_ < 1 || m_ > kMaxDim) throw PreconditionError("levy dimension must be in [1, 8]");
  switch (variant_) {
    case LevyVariant::isotropic_stable:
    case LevyVariant::onedim_symmetric_stable:
      if (!(alpha_ > 0.0 && alpha_ < 2.0)) throw PreconditionError("stable index alpha must lie in (0, 2)");
      if (!(scale_ > 0.0)) throw PreconditionError("stable scale c must be positive");
      break;
    case LevyVariant::compound_poisson_pareto:
      if (!(alpha_ > 0.0)) throw PreconditionError("Pareto index alpha must be positive");
      if (!(scale_ > 0.0)) throw PreconditionError("compound Poisson rate must be positive");
      break;
    case LevyVariant::brownian:
      break;
  }
  if (A_.rows() != m_ || A_.cols() != m_) throw PreconditionError("brownian covariance must be m x m");
  if (mu_.size() != m_) throw PreconditionError("drift must have dimension m");
  if (!A_.isApprox(A_.transpose(), 1e-12) && A_.norm() > 0)
    throw PreconditionError("brownian covariance must be symmetric");
  if (m_ > 0 && A_.norm() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(A_);
    if (eig.eigenvalues().minCoeff() < -1e-12 * A_.norm())
      throw PreconditionError("brownian covariance must be nonnegative definite");
  }
}

double LevyModel::tail(double u) const {
  if (!(u > 0.0)) throw DomainError("tail: u must be positive");
  switch (variant_) {
    case LevyVariant::isotropic_stable:
      return scale_ * unit_sphere_area(m_) * std::pow(u, -alpha_) / alpha_;
    case LevyVariant::onedim_symmetric_stable:
      return 2.0 * scale_ / alpha_ * std::pow(u, -alpha_);
    case LevyVariant::compound_poisson_pareto:
      return scale_ * std::min(1.0, std::pow(u, -alpha_));
    case LevyVariant::brownian:
      return 0.0;
  }
  return 0.0;
}

double LevyModel::big_jump_rate(double threshold) const {
  if (!(threshold > 0.0)) throw DomainError("big_jump_rate: threshold must be positive");
  return tail(threshold);
}

double LevyModel::sample_radius(double threshold, Rng& rng) const {
  // Radial law above `threshold` is Pareto(alpha) for every catalog variant;
  // compound Poisson radii are never below 1.
  const double lo = variant_ == LevyVariant::compound_poisson_pareto ? std::max(threshold, 1.0)
                                                                     : threshold;
  const double u = uniform_open(rng);
  if (alpha_ == 1.0) return lo / u;
  return lo * std::pow(u, -1.0 / alpha_);
}

Vec LevyModel::sample_direction(Rng& rng) const {
  Vec d(m_);
  if (spectral_ == Spectral::one_sided) {
    d.setZero();
    d(0) = 1.0;
    return d;
  }
  if (m_ == 1) {
    d(0) = (rng() >> 63) ? 1.0 : -1.0;
    return d;
  }
  if (m_ == 2) {
    unit_circle(rng, d(0), d(1));
    return d;
  }
  std::normal_distribution<double> normal;
  double norm = 0.0;
  do {
    for (int i = 0; i < m_; ++i) d(i) = normal(rng);
    norm = d.norm();
  } while (norm == 0.0);
  return d / norm;
}

Vec LevyModel::sample_big_jump(double threshold, Rng& rng) const {
  if (!(threshold > 0.0)) throw DomainError("sample_big_jump: threshold must be positive");
  if (!(tail(threshold) > 0.0)) throw PreconditionError("sample_big_jump: no jump mass above threshold");
  const double r = sample_radius(threshold, rng);
  return r * sample_direction(rng);
}

Vec LevyModel::direction_mean() const {
  Vec mean = Vec::Zero(m_);
  if (spectral_ == Spectral::one_sided) mean(0) = 1.0;
  return mean;
}

Mat LevyModel::direction_second_moment() const {
  if (spectral_ == Spectral::one_sided) {
    Mat e = Mat::Zero(m_, m_);
    e(0, 0) = 1.0;
    return e;
  }
  return Mat::Identity(m_, m_) / m_;
}

Vec LevyModel::first_moment(double lo, double hi) const {
  if (!has_jumps() || symmetric()) return Vec::Zero(m_);
  // Asymmetric directions only occur for compound Poisson: radii >= 1 with
  // density rate * alpha * r^{-alpha-1}.
  const double a = std::max(lo, 1.0);
  return scale_ * radial_power_integral(1.0, alpha_, a, hi) * direction_mean();
}

Mat LevyModel::gaussian_proxy_cov(double delta) const {
  if (!(delta > 0.0)) throw DomainError("gaussian_proxy_cov: delta must be positive");
  switch (variant_) {
    case LevyVariant::isotropic_stable:
    case LevyVariant::onedim_symmetric_stable:
      // H(u) = K u^{-alpha} with K = tail(1); radial density K alpha r^{-alpha-1}.
      return tail(1.0) * radial_power_integral(2.0, alpha_, 0.0, delta) *
             direction_second_moment();
    case LevyVariant::compound_poisson_pareto:
      if (delta <= 1.0) return Mat::Zero(m_, m_);
      return scale_ * radial_power_integral(2.0, alpha_, 1.0, delta) * direction_second_moment();
    case LevyVariant::brownian:
      return Mat::Zero(m_, m_);
  }
  return Mat::Zero(m_, m_);
}

SmallJumpMoments LevyModel::small_jump_moments(double threshold) const {
  if (!(threshold > 1.0)) throw DomainError("small_jump_moments: threshold must exceed 1");
  SmallJumpMoments moments;
  moments.drift = first_moment(1.0, threshold);
  moments.proxy_cov = [self = *this](double delta) { return self.gaussian_proxy_cov(delta); };
  return moments;
}

Estimate limit_measure(const LevyModel& model, const RegionIndicator& region, double precision,
                       Rng& rng, long long max_samples) {
  if (!(region.r_min > 0.0)) throw PreconditionError("limit_measure: region must be bounded away from the origin (r_min > 0)");
  if (!(precision > 0.0)) throw DomainError("limit_measure: precision must be positive");
  if (!model.has_jumps()) throw PreconditionError("limit_measure: model has no jump measure");

  // nu(A)/H(1) for the pure-power shape of nu: H(r_min)/H(1) = r_min^{-alpha}.
  const double weight = std::pow(region.r_min, -model.alpha());
  constexpr long long kBatch = 20'000;
  long long hits = 0;
  long long n = 0;
  Estimate est;
  while (n < max_samples) {
    for (long long i = 0; i < kBatch; ++i) {
      const double r = region.r_min * std::pow(uniform_open(rng), -1.0 / model.alpha());
      if (region.contains(r * model.sample_direction(rng))) ++hits;
    }
    n += kBatch;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    est.value = weight * p;
    // Floor the variance at one pseudo-count so an all-miss batch is not "exact".
    const double var = std::max(p * (1.0 - p), 1.0 / static_cast<double>(n));
    est.stderr_ = weight * std::sqrt(var / static_cast<double>(n));
    if (est.stderr_ <= precision) return est;
  }
  throw BudgetExceeded("limit_measure: precision not reached within sample budget", est.value,
                       est.stderr_);
}

namespace {

// Length of {s in (0, s_max] : region contains s^{-1/alpha} dir}.
double ray_measure(const RegionIndicator& region, const Vec& dir, double alpha, double s_max,
                   int n_radial) {
  auto in = [&](double s) { return region.contains(std::pow(s, -1.0 / alpha) * dir); };
  const double s_floor = s_max * 1e-4;
  double total = 0.0;
  double prev_s = s_floor;
  bool prev_in = in(prev_s);
  // Mass below s_floor (radii beyond 1e4^(1/alpha) r_min) is attributed to the
  // membership observed at s_floor.
  if (prev_in) total += s_floor;
  for (int k = 1; k <= n_radial; ++k) {
    const double s = s_max * static_cast<double>(k) / n_radial;
    const bool cur_in = in(s);
    if (cur_in == prev_in) {
      if (cur_in) total += s - prev_s;
    } else {
      double lo = prev_s;
      double hi = s;
      for (int it = 0; it < 60 && hi - lo > 1e-14 * s_max; ++it) {
        const double mid = 0.5 * (lo + hi);
        (in(mid) == prev_in ? lo : hi) = mid;
      }
      const double cross = 0.5 * (lo + hi);
      total += prev_in ? cross - prev_s : s - cross;
    }
    prev_s = s;
    prev_in = cur_in;
  }
  return total;
}

}  // namespace

Estimate limit_measure_quadrature(const LevyModel& model, const RegionIndicator& region,
                                  int n_angles, int n_radial) {
  if (!(region.r_min > 0.0)) throw PreconditionError("limit_measure_quadrature: region must be bounded away from the origin (r_min > 0)");
  if (!model.has_jumps()) throw PreconditionError("limit_measure_quadrature: model has no jump measure");
  const int m = model.dimension();
  const double alpha = model.alpha();
  const double s_max = std::pow(region.r_min, -alpha);

  if (model.spectral() == Spectral::one_sided) {
    Vec e = Vec::Zero(m);
    e(0) = 1.0;
    return {ray_measure(region, e, alpha, s_max, n_radial), 0.0};
  }
  if (m == 1) {
    const double plus = ray_measure(region, vec({1.0}), alpha, s_max, n_radial);
    const double minus = ray_measure(region, vec({-1.0}), alpha, s_max, n_radial);
    return {0.5 * (plus + minus), 0.0};
  }
  if (m != 2) throw PreconditionError("limit_measure_quadrature: only m = 1 or m = 2 supported");
  if (n_angles < 8 || n_angles % 2 != 0) throw PreconditionError("limit_measure_quadrature: n_angles must be even and >= 8");

  // Periodic trapezoid rule in the angle; the even nodes form the coarse rule.
  double sum_all = 0.0;
  double sum_even = 0.0;
  for (int k = 0; k < n_angles; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_angles;
    const double v = ray_measure(region, vec({std::cos(phi), std::sin(phi)}), alpha, s_max, n_radial);
    sum_all += v;
    if (k % 2 == 0) sum_even += v;
  }
  const double fine = sum_all / n_angles;
  const double coarse = sum_even / (n_angles / 2);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace hte
