#include "heavytail/system.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "heavytail/errors.hpp"
#include "heavytail/ode.hpp"

namespace hte {

// ---------------------------------------------------------------- Potential

Potential Potential::quadratic(Mat K) {
  if (K.rows() != K.cols() || K.rows() < 1 || K.rows() > kMaxDim)
    throw PreconditionError("quadratic potential: K must be square with 1 <= n <= 8");
  if (!K.isApprox(K.transpose(), 1e-12)) throw PreconditionError("quadratic potential: K must be symmetric");
  Potential p;
  p.kind_ = Kind::quadratic;
  p.n_ = static_cast<int>(K.rows());
  p.name_ = "quadratic";
  p.K_ = std::move(K);
  p.finish();
  if (!(p.c1_ > 0.0)) throw PreconditionError("quadratic potential: K must be positive definite");
  return p;
}

Potential Potential::quartic_radial(int n, double k) {
  if (n < 1 || n > kMaxDim) throw PreconditionError("quartic potential: dimension must be in [1, 8]");
  if (!(k >= 0.0)) throw PreconditionError("quartic potential: k must be nonnegative");
  Potential p;
  p.kind_ = Kind::quartic_radial;
  p.n_ = n;
  p.name_ = "quartic_radial";
  p.k_ = k;
  p.finish();
  return p;
}

Potential Potential::custom(int n, std::function<double(const Vec&)> value,
                            std::function<Vec(const Vec&)> gradient, std::string name) {
  if (n < 1 || n > kMaxDim) throw PreconditionError("custom potential: dimension must be in [1, 8]");
  Potential p;
  p.kind_ = Kind::custom;
  p.n_ = n;
  p.name_ = std::move(name);
  p.value_fn_ = std::move(value);
  p.grad_fn_ = std::move(gradient);
  p.finish();
  return p;
}

void Potential::finish() {
  switch (kind_) {
    case Kind::quadratic: {
      Eigen::SelfAdjointEigenSolver<Mat> eig(K_);
      c1_ = eig.eigenvalues().minCoeff();
      break;
    }
    case Kind::quartic_radial:
      c1_ = 1.0;
      break;
    case Kind::custom: {
      Eigen::SelfAdjointEigenSolver<Mat> eig(hessian(Vec::Zero(n_)));
      c1_ = eig.eigenvalues().minCoeff();
      break;
    }
  }
}

double Potential::value(const Vec& x) const {
  switch (kind_) {
    case Kind::quadratic: return 0.5 * x.dot(K_ * x);
    case Kind::quartic_radial: {
      const double r2 = x.squaredNorm();
      return 0.25 * k_ * r2 * r2 + 0.5 * r2;
    }
    case Kind::custom: return value_fn_(x);
  }
  return 0.0;
}

Vec Potential::gradient(const Vec& x) const {
  switch (kind_) {
    case Kind::quadratic: return K_ * x;
    case Kind::quartic_radial: return (k_ * x.squaredNorm() + 1.0) * x;
    case Kind::custom: return grad_fn_(x);
  }
  return x;
}

Mat Potential::hessian(const Vec& x, double h) const {
  Mat H(n_, n_);
  for (int j = 0; j < n_; ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    H.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

Vec drift(const Potential& p, const Vec& x) { return -p.gradient(x); }

// --------------------------------------------------------------- NoiseField

NoiseField NoiseField::constant(Mat F0) {
  if (F0.rows() < 1 || F0.cols() < 1) throw PreconditionError("constant noise field: F0 must be non-empty");
  NoiseField f;
  f.kind_ = Kind::constant;
  f.n_ = static_cast<int>(F0.rows());
  f.m_ = static_cast<int>(F0.cols());
  f.F0_ = std::move(F0);
  return f;
}

NoiseField NoiseField::example1() {
  NoiseField f;
  f.kind_ = Kind::example1;
  f.n_ = 1;
  f.m_ = 2;
  return f;
}

NoiseField NoiseField::exp1d() {
  NoiseField f;
  f.kind_ = Kind::exp1d;
  f.n_ = 1;
  f.m_ = 1;
  return f;
}

NoiseField NoiseField::diagonal_scalar(int n, double g) {
  if (n < 1 || n > kMaxDim) throw PreconditionError("diagonal noise field: dimension must be in [1, 8]");
  NoiseField f;
  f.kind_ = Kind::diagonal_scalar;
  f.n_ = n;
  f.m_ = n;
  f.g_ = g;
  return f;
}

std::string NoiseField::name() const {
  switch (kind_) {
    case Kind::constant: return "constant";
    case Kind::example1: return "example1";
    case Kind::exp1d: return "exp1d";
    case Kind::diagonal_scalar: return "diagonal_scalar";
  }
  return "unknown";
}

Mat NoiseField::value(const Vec& x) const {
  switch (kind_) {
    case Kind::constant: return F0_;
    case Kind::example1: {
      Mat F(1, 2);
      const double a = x(0) + 1.0, b = x(0) - 1.0;
      F(0, 0) = 1.0 / (a * a + 1.0);
      F(0, 1) = 1.0 / (b * b + 1.0);
      return F;
    }
    case Kind::exp1d: return Mat::Constant(1, 1, std::exp(-x(0)));
    case Kind::diagonal_scalar: {
      Mat F = Mat::Zero(n_, n_);
      for (int i = 0; i < n_; ++i) F(i, i) = g_ / (1.0 + x(i) * x(i));
      return F;
    }
  }
  return F0_;
}

Mat NoiseField::partial(const Vec& x, int l) const {
  Mat D = Mat::Zero(n_, m_);
  switch (kind_) {
    case Kind::constant: break;
    case Kind::example1: {
      const double a = x(0) + 1.0, b = x(0) - 1.0;
      const double qa = a * a + 1.0, qb = b * b + 1.0;
      D(0, 0) = -2.0 * a / (qa * qa);
      D(0, 1) = -2.0 * b / (qb * qb);
      break;
    }
    case Kind::exp1d: D(0, 0) = -std::exp(-x(0)); break;
    case Kind::diagonal_scalar: {
      const double q = 1.0 + x(l) * x(l);
      D(l, l) = -2.0 * g_ * x(l) / (q * q);
      break;
    }
  }
  return D;
}

Vec NoiseField::stratonovich_term(const Vec& x, const Mat& A) const {
  Vec out = Vec::Zero(n_);
  if (kind_ == Kind::constant || A.norm() == 0.0) return out;
  const Mat F = value(x);
  for (int l = 0; l < n_; ++l) {
    const Vec AFl = A * F.row(l).transpose();
    out += partial(x, l) * AFl;
  }
  return out;
}

// ------------------------------------------------------------------- Domain

Domain Domain::ball(int n, double radius) {
  if (n < 1 || n > kMaxDim) throw PreconditionError("ball domain: dimension must be in [1, 8]");
  if (!(radius > 0.0)) throw PreconditionError("ball domain: radius must be positive");
  Domain d;
  d.kind_ = Kind::ball;
  d.n_ = n;
  d.radius_ = radius;
  d.lower_ = Vec::Constant(n, -radius);
  d.upper_ = Vec::Constant(n, radius);
  return d;
}

Domain Domain::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() < 1 || lower.size() > kMaxDim)
    throw PreconditionError("box domain: bounds must have equal dimension in [1, 8]");
  if ((upper.array() <= lower.array()).any()) throw PreconditionError("box domain: lower < upper required");
  Domain d;
  d.kind_ = Kind::box;
  d.n_ = static_cast<int>(lower.size());
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

double Domain::signed_distance(const Vec& x) const {
  if (kind_ == Kind::ball) return x.norm() - radius_;
  double outside2 = 0.0;
  double inside = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i) {
    const double d = std::max(lower_(i) - x(i), x(i) - upper_(i));
    if (d > 0) outside2 += d * d;
    inside = std::max(inside, d);
  }
  return outside2 > 0.0 ? std::sqrt(outside2) : inside;
}

Vec Domain::outward_normal(const Vec& x) const {
  Vec n = Vec::Zero(n_);
  if (kind_ == Kind::ball) {
    const double r = x.norm();
    if (r == 0.0) throw DomainError("outward_normal: undefined at the centre of a ball");
    return x / r;
  }
  double best = -std::numeric_limits<double>::infinity();
  int axis = 0;
  double sign = 1.0;
  for (int i = 0; i < n_; ++i) {
    const double up = x(i) - upper_(i);
    const double lo = lower_(i) - x(i);
    if (up > best) { best = up; axis = i; sign = 1.0; }
    if (lo > best) { best = lo; axis = i; sign = -1.0; }
  }
  n(axis) = sign;
  return n;
}

Vec Domain::sample_boundary(Rng& rng) const {
  Vec x(n_);
  if (kind_ == Kind::ball) {
    std::normal_distribution<double> normal;
    double r = 0.0;
    do {
      for (int i = 0; i < n_; ++i) x(i) = normal(rng);
      r = x.norm();
    } while (r == 0.0);
    return radius_ * x / r;
  }
  std::uniform_int_distribution<int> face(0, 2 * n_ - 1);
  const int f = face(rng);
  for (int i = 0; i < n_; ++i) {
    std::uniform_real_distribution<double> u(lower_(i), upper_(i));
    x(i) = u(rng);
  }
  x(f / 2) = (f % 2 == 0) ? lower_(f / 2) : upper_(f / 2);
  return x;
}

void System::validate() const {
  if (field.rows() != potential.dimension())
    throw PreconditionError("system: noise field rows must equal the potential's dimension");
  if (domain.dimension() != potential.dimension())
    throw PreconditionError("system: domain dimension must equal the potential's dimension");
}

// -------------------------------------------------------------------- flows

Vec flow_phi(const NoiseField& f, const Vec& z, const Vec& x, double tol) {
  if (!(tol > 0.0)) throw DomainError("flow_phi: tol must be positive");
  if (z.size() != f.cols() || x.size() != f.rows()) throw PreconditionError("flow_phi: dimension mismatch");
  if (z.isZero(0.0)) return x;
  if (f.is_constant()) return x + f.value(x) * z;
  OdeOptions opt;
  // Local errors accumulate over the unit interval; aim two digits tighter.
  opt.tol = 0.01 * tol;
  auto rhs = [&](double, const Vec& y) -> Vec { return f.value(y) * z; };
  return integrate_adaptive(rhs, x, 0.0, 1.0, opt).y;
}

Vec deterministic_flow(const Potential& p, const Vec& y, double t, double tol) {
  if (!(t >= 0.0)) throw DomainError("deterministic_flow: t must be nonnegative");
  if (!(tol > 0.0)) throw DomainError("deterministic_flow: tol must be positive");
  if (t == 0.0) return y;
  OdeOptions opt;
  opt.tol = tol;
  opt.max_steps = 2'000'000;
  auto rhs = [&](double, const Vec& x) -> Vec { return -p.gradient(x); };
  return integrate_adaptive(rhs, y, 0.0, t, opt).y;
}

AssumptionReport check_assumptions(const Potential& p, const NoiseField& f, const Domain& d,
                                   double delta, int n_samples, Rng& rng) {
  if (n_samples < 1) throw PreconditionError("check_assumptions: n_samples must be >= 1");
  AssumptionReport rep;
  const int n = p.dimension();
  if (d.dimension() != n || f.rows() != n) {
    rep.diagnostics.push_back("dimension mismatch between potential, noise field and domain");
    return rep;
  }
  const Vec origin = Vec::Zero(n);
  rep.origin_inside = d.contains(origin);
  if (!rep.origin_inside) rep.diagnostics.push_back("domain does not contain the origin");

  rep.hessian_positive = p.curvature_at_origin() > 0.0;
  if (!rep.hessian_positive) rep.diagnostics.push_back("Hessian of U at the origin is not positive definite");
  if (std::abs(p.value(origin)) > 1e-12 || p.gradient(origin).norm() > 1e-10)
    rep.diagnostics.push_back("origin is not a critical point with U(0) = 0");

  rep.worst_margin = -std::numeric_limits<double>::infinity();
  // Box domains in 1-D have two boundary points; visit both deterministically.
  std::vector<Vec> points;
  if (d.kind() == Domain::Kind::box && n == 1) {
    points.push_back(d.lower());
    points.push_back(d.upper());
  }
  for (int i = 0; i < n_samples; ++i) points.push_back(d.sample_boundary(rng));
  for (const Vec& y : points) {
    const double margin = d.outward_normal(y).dot(-p.gradient(y));
    rep.worst_margin = std::max(rep.worst_margin, margin);
  }
  if (rep.worst_margin > -delta) {
    std::ostringstream os;
    os << "inflow condition violated: worst margin " << rep.worst_margin << " > -" << delta;
    rep.diagnostics.push_back(os.str());
  }

  // Boundedness of F and its derivatives on G and its unit neighbourhood.
  rep.field_bounded = true;
  constexpr double kBound = 1e6;
  for (int i = 0; i < n_samples; ++i) {
    Vec x(n);
    for (int k = 0; k < n; ++k) {
      std::uniform_real_distribution<double> u(d.lower()(k) - 1.0, d.upper()(k) + 1.0);
      x(k) = u(rng);
    }
    double size = f.value(x).cwiseAbs().maxCoeff();
    for (int l = 0; l < n; ++l) size = std::max(size, f.partial(x, l).cwiseAbs().maxCoeff());
    if (!std::isfinite(size) || size > kBound) {
      rep.field_bounded = false;
      rep.diagnostics.push_back("noise field or its derivative unbounded near the domain");
      break;
    }
  }
  rep.pass = rep.origin_inside && rep.hessian_positive && rep.field_bounded &&
             rep.worst_margin <= -delta && rep.diagnostics.empty();
  return rep;
}

double relaxation_time(const Potential& p, double gamma, double eps) {
  const double c1 = p.curvature_at_origin();
  if (!(c1 > 0.0)) throw PreconditionError("relaxation_time: Hessian at the origin must be positive definite");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("relaxation_time: eps must lie in (0, 1]");
  return 2.0 * gamma / c1 * std::abs(std::log(eps));
}

}  // namespace hte
