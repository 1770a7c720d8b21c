#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heavytail/errors.hpp"
#include "heavytail/levy_model.hpp"

using namespace hte;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

LevyModel cauchy2() { return LevyModel::isotropic_stable(2, 1.0, 1.0); }

RegionIndicator example1_set() {
  // |z1 + z2| >= 2, nearest point at distance sqrt(2)
  return {[](const Vec& z) { return std::abs(z(0) + z(1)) >= 2.0; }, std::sqrt(2.0)};
}
}  // namespace

TEST_CASE("tail of the 2-D Cauchy model") {
  const auto m = cauchy2();
  CHECK(m.tail(1.0 / 0.01) == Approx(2.0 * kPi * 0.01).epsilon(1e-14));
  CHECK(m.tail(1.0) == Approx(2.0 * kPi));
  CHECK_THROWS_AS(m.tail(0.0), DomainError);
  CHECK_THROWS_AS(m.tail(-1.0), DomainError);
}

TEST_CASE("one-dimensional stable normalization") {
  for (double a : {0.5, 1.0, 1.5}) {
    const auto m = LevyModel::onedim_symmetric_stable(a, 1.0);
    CHECK(m.tail(1.0) == Approx(2.0 / a));
  }
}

TEST_CASE("tail ratio reflects the tail index") {
  for (double a : {0.3, 1.0, 1.7}) {
    const auto iso = LevyModel::isotropic_stable(3, a, 0.7);
    CHECK(iso.tail(2.0) / iso.tail(1.0) == Approx(std::pow(2.0, -a)));
    CHECK(iso.tail_index() == a);
    const auto cpp = LevyModel::compound_poisson_pareto(2, a, 3.0, Spectral::isotropic);
    CHECK(cpp.tail(8.0) / cpp.tail(4.0) == Approx(std::pow(2.0, -a)));
  }
}

TEST_CASE("big jump rate equals the tail") {
  const auto m = cauchy2();
  CHECK(m.big_jump_rate(std::sqrt(10.0)) == Approx(1.98692).epsilon(1e-5));
  CHECK(m.big_jump_rate(1.0) == Approx(2.0 * kPi));
  for (double t : {0.2, 3.0, 77.0}) CHECK(m.big_jump_rate(t) == m.tail(t));
  CHECK_THROWS_AS(m.big_jump_rate(0.0), DomainError);
}

TEST_CASE("construction invariants") {
  CHECK_THROWS_AS(LevyModel::isotropic_stable(2, 2.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(LevyModel::isotropic_stable(2, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(LevyModel::isotropic_stable(2, 1.0, -1.0), PreconditionError);
  Mat asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(LevyModel::isotropic_stable(2, 1.0, 1.0, asym), PreconditionError);
  Mat neg(2, 2);
  neg << 1, 0, 0, -0.1;
  CHECK_THROWS_AS(LevyModel::isotropic_stable(2, 1.0, 1.0, neg), PreconditionError);
  CHECK(parse_levy_variant(to_string(LevyVariant::compound_poisson_pareto)) == LevyVariant::compound_poisson_pareto);
  CHECK_THROWS_AS(parse_levy_variant("gamma"), ConfigError);
}

TEST_CASE("big jumps respect the threshold and are isotropic") {
  const auto m = cauchy2();
  Rng rng(42);
  const double T = 5.0;
  const int n = 200000;
  int beyond = 0;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec z = m.sample_big_jump(T, rng);
    const double r = z.norm();
    REQUIRE(r >= T);
    beyond += r >= 2.0 * T;
    sx += z(0) / r;
    sy += z(1) / r;
  }
  const double p = static_cast<double>(beyond) / n;
  CHECK(std::abs(p - 0.5) < 4.0 * std::sqrt(0.25 / n));
  // unit vectors have per-component variance 1/2
  CHECK(std::abs(sx / n) < 4.0 * std::sqrt(0.5 / n));
  CHECK(std::abs(sy / n) < 4.0 * std::sqrt(0.5 / n));
}

TEST_CASE("limit measure normalization and symmetry") {
  Rng rng(7);
  const auto m3 = LevyModel::isotropic_stable(3, 1.3, 2.0);
  const RegionIndicator unit{[](const Vec& z) { return z.norm() >= 1.0; }, 1.0};
  const Estimate e = limit_measure(m3, unit, 1e-3, rng);
  CHECK(e.value == Approx(1.0).epsilon(1e-12));

  const auto m1 = LevyModel::onedim_symmetric_stable(0.8, 1.0);
  const RegionIndicator right{[](const Vec& z) { return z(0) >= 1.0; }, 1.0};
  const Estimate h = limit_measure(m1, right, 2e-3, rng);
  CHECK(std::abs(h.value - 0.5) < 4.0 * h.stderr_);
  CHECK(limit_measure_quadrature(m1, right).value == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("limit measure of the example1 exit set") {
  const double oracle = std::sqrt(2.0) / kPi;  // projection integral 4/sqrt(2) over H(1) = 2 pi
  const Estimate q = limit_measure_quadrature(cauchy2(), example1_set());
  CHECK(std::abs(q.value - oracle) < 1e-4);
  Rng rng(11);
  const Estimate mc = limit_measure(cauchy2(), example1_set(), 2e-3, rng);
  CHECK(mc.stderr_ <= 2e-3);
  CHECK(std::abs(mc.value - oracle) < 3.0 * mc.stderr_);
}

TEST_CASE("limit measure errors") {
  Rng rng(1);
  const RegionIndicator bad{[](const Vec&) { return true; }, 0.0};
  CHECK_THROWS_AS(limit_measure(cauchy2(), bad, 1e-3, rng), PreconditionError);
  const RegionIndicator thin{[](const Vec& z) { return std::abs(z(1)) < 1e-3 && z.norm() > 1.0; }, 1.0};
  CHECK_THROWS_AS(limit_measure(cauchy2(), thin, 1e-7, rng, 100000), BudgetExceeded);
  try {
    limit_measure(cauchy2(), thin, 1e-7, rng, 100000);
  } catch (const BudgetExceeded& e) {
    CHECK(e.partial_estimate() >= 0.0);
    CHECK(e.partial_stderr() > 0.0);
  }
}

TEST_CASE("small jump moments") {
  const auto m = cauchy2();
  const SmallJumpMoments sm = m.small_jump_moments(10.0);
  CHECK(sm.drift.norm() == 0.0);
  const Mat cov = sm.proxy_cov(0.01);
  CHECK(cov(0, 0) == Approx(kPi * 0.01));
  CHECK(cov(1, 1) == Approx(kPi * 0.01));
  CHECK(cov(0, 1) == Approx(0.0));
  CHECK_THROWS_AS(m.small_jump_moments(1.0), DomainError);
  CHECK_THROWS_AS(m.small_jump_moments(0.5), DomainError);

  const auto cpp = LevyModel::compound_poisson_pareto(2, 1.5, 2.0, Spectral::isotropic);
  CHECK(cpp.gaussian_proxy_cov(0.9).norm() == 0.0);
  const auto one = LevyModel::compound_poisson_pareto(1, 1.5, 2.0, Spectral::one_sided);
  CHECK(one.small_jump_moments(4.0).drift(0) > 0.0);
}
