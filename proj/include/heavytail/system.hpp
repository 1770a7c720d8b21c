#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heavytail/linalg.hpp"
#include "heavytail/random.hpp"

namespace hte {

/// Single-well potential U with U(0) = 0, grad U(0) = 0 and positive definite
/// Hessian at the origin.
class Potential {
 public:
  enum class Kind { quadratic, quartic_radial, custom };

  /// U(x) = x^T K x / 2 with K symmetric positive definite.
  static Potential quadratic(Mat K);
  /// U(x) = k ||x||^4 / 4 + ||x||^2 / 2.
  static Potential quartic_radial(int n, double k);
  /// Arbitrary potential from callables; the Hessian at 0 is checked numerically.
  static Potential custom(int n, std::function<double(const Vec&)> value,
                          std::function<Vec(const Vec&)> gradient, std::string name = "custom");

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  const std::string& name() const { return name_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// Central-difference Hessian.
  Mat hessian(const Vec& x, double h = 1e-5) const;
  /// Smallest eigenvalue C1 of the Hessian at the origin.
  double curvature_at_origin() const { return c1_; }

 private:
  Potential() = default;
  void finish();

  Kind kind_ = Kind::quadratic;
  int n_ = 1;
  std::string name_;
  Mat K_;
  double k_ = 0.0;
  std::function<double(const Vec&)> value_fn_;
  std::function<Vec(const Vec&)> grad_fn_;
  double c1_ = 0.0;
};

/// Noise coefficient F(x), an n x m matrix of smooth bounded functions.
class NoiseField {
 public:
  enum class Kind { constant, example1, exp1d, diagonal_scalar };

  static NoiseField constant(Mat F0);
  /// n = 1, m = 2: F1(x) = 1/((x+1)^2+1), F2(x) = 1/((x-1)^2+1).
  static NoiseField example1();
  /// n = m = 1: F(x) = exp(-x).
  static NoiseField exp1d();
  /// n = m: F(x) = diag(g / (1 + x_i^2)).
  static NoiseField diagonal_scalar(int n, double g);

  Kind kind() const { return kind_; }
  std::string name() const;
  int rows() const { return n_; }
  int cols() const { return m_; }

  Mat value(const Vec& x) const;
  /// Partial derivative d F / d x_l.
  Mat partial(const Vec& x, int l) const;
  /// sum_l sum_{j,k} d_l F_ij(x) F_lk(x) A_jk, the Itô–Stratonovich drift
  /// correction per unit time without the factor eps^2 / 2.
  Vec stratonovich_term(const Vec& x, const Mat& A) const;
  bool is_constant() const { return kind_ == Kind::constant; }

 private:
  NoiseField() = default;

  Kind kind_ = Kind::constant;
  int n_ = 1;
  int m_ = 1;
  Mat F0_;
  double g_ = 1.0;
};

/// Bounded domain G containing the origin.
class Domain {
 public:
  enum class Kind { ball, box };

  static Domain ball(int n, double radius);
  static Domain box(Vec lower, Vec upper);

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  double radius() const { return radius_; }

  /// Negative inside, zero on the boundary, positive outside.
  double signed_distance(const Vec& x) const;
  /// Open-set membership; the boundary counts as outside.
  bool contains(const Vec& x) const { return signed_distance(x) < 0.0; }
  /// Unit outward normal. On box edges and corners the face with the largest
  /// penetration wins, ties to the lowest coordinate index.
  Vec outward_normal(const Vec& x) const;
  Vec sample_boundary(Rng& rng) const;
  std::string name() const { return kind_ == Kind::ball ? "ball" : "box"; }

 private:
  Domain() = default;

  Kind kind_ = Kind::ball;
  int n_ = 1;
  double radius_ = 1.0;
  Vec lower_;
  Vec upper_;
};

struct System {
  Potential potential;
  NoiseField field;
  Domain domain;

  int n() const { return potential.dimension(); }
  int m() const { return field.cols(); }
  /// Throws PreconditionError on inconsistent dimensions.
  void validate() const;
};

/// -grad U(x).
Vec drift(const Potential& p, const Vec& x);

/// Marcus jump map: y(1) for dy/du = F(y) z, y(0) = x, accurate to about tol.
Vec flow_phi(const NoiseField& f, const Vec& z, const Vec& x, double tol = 1e-8);

/// Y_t(y) of the deterministic gradient flow.
Vec deterministic_flow(const Potential& p, const Vec& y, double t, double tol = 1e-8);

struct AssumptionReport {
  bool pass = false;
  bool origin_inside = false;
  bool hessian_positive = false;
  bool field_bounded = false;
  /// max over sampled boundary points of <n(y), -grad U(y)>; must be <= -delta.
  double worst_margin = 0.0;
  std::vector<std::string> diagnostics;
};

AssumptionReport check_assumptions(const Potential& p, const NoiseField& f, const Domain& d,
                                   double delta, int n_samples, Rng& rng);

/// (2 gamma / C1) |ln eps|.
double relaxation_time(const Potential& p, double gamma, double eps);

}  // namespace hte
