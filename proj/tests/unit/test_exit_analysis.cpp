#include <doctest.h>

#include <cmath>
#include <numbers>

#include "heavytail/errors.hpp"
#include "heavytail/exit_analysis.hpp"

using namespace hte;
using doctest::Approx;

namespace {

System example1() {
  return {Potential::quadratic(Mat::Identity(1, 1)), NoiseField::example1(), Domain::box(vec({-1.0}), vec({1.0}))};
}

System exp1d(double a = 1.0, double b = 1.0) {
  return {Potential::quadratic(Mat::Identity(1, 1)), NoiseField::exp1d(), Domain::box(vec({-a}), vec({b}))};
}

}  // namespace

TEST_CASE("example1 Ito/Stratonovich exit set is a pair of half-planes") {
  const auto spec = ExitSetSpec::make(example1(), ExitSetSpec::Variant::ito_strat);
  CHECK(!exit_indicator(spec, zeros(2)));
  CHECK(exit_indicator(spec, vec({1.5, 1.5})));
  CHECK(!exit_indicator(spec, vec({0.5, 0.5})));
  CHECK(exit_indicator(spec, vec({-3.0, 0.5})));
  CHECK(spec.r_min <= std::sqrt(2.0));
  CHECK(spec.r_min > 1.3);
  Rng rng(1);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec z = vec({u(rng), u(rng)});
    CHECK(exit_indicator(spec, z) == (std::abs(z(0) + z(1)) >= 2.0));
    if (z.norm() < spec.r_min) CHECK(!exit_indicator(spec, z));
  }
}

TEST_CASE("exp1d Marcus exit set") {
  const auto spec = ExitSetSpec::make(exp1d(), ExitSetSpec::Variant::marcus);
  const double hi = std::numbers::e - 1.0, lo = 1.0 / std::numbers::e - 1.0;
  CHECK(exit_indicator(spec, vec({hi + 1e-6})));
  CHECK(!exit_indicator(spec, vec({hi - 1e-6})));
  CHECK(exit_indicator(spec, vec({lo - 1e-6})));
  CHECK(!exit_indicator(spec, vec({lo + 1e-6})));
  CHECK(exit_indicator(spec, vec({-5.0})));
  CHECK(exit_radius(spec, vec({1.0})) == Approx(hi).epsilon(1e-6));
  CHECK(exit_radius(spec, vec({-1.0})) == Approx(-lo).epsilon(1e-6));
}

TEST_CASE("predicted rates for example1") {
  Rng rng(2);
  const auto model = LevyModel::isotropic_stable(2, 1.0, 1.0);
  const auto spec = ExitSetSpec::make(example1(), ExitSetSpec::Variant::ito_strat);
  const RateEstimate r = predicted_rate(spec, model, 0.01, 1e-3, rng, MeasureMethod::quadrature);
  CHECK(r.lambda == Approx(2.0 * std::sqrt(2.0) * 0.01).epsilon(1e-4));
  CHECK(r.mean_exit_time() == Approx(35.355).epsilon(1e-4));
  const RateEstimate r2 = predicted_rate(spec, model, 0.02, 1e-3, rng, MeasureMethod::quadrature);
  CHECK(r2.lambda == Approx(2.0 * r.lambda));

  // Marcus set; oracle from the independent polar integral of the exit radius, 0.48760
  const auto mspec = ExitSetSpec::make(example1(), ExitSetSpec::Variant::marcus);
  const RateEstimate rm = predicted_rate(mspec, model, 0.01, 1e-3, rng, MeasureMethod::quadrature);
  CHECK(rm.m == Approx(0.48760).epsilon(2e-4));
  CHECK(0.01 * rm.mean_exit_time() == Approx(0.3264).epsilon(1e-3));
}

TEST_CASE("an empty exit set violates the hypothesis") {
  // F = 0: no jump can leave G
  const System dead{Potential::quadratic(Mat::Identity(1, 1)), NoiseField::constant(Mat::Zero(1, 1)),
                    Domain::box(vec({-1.0}), vec({1.0}))};
  const auto spec = ExitSetSpec::make(dead, ExitSetSpec::Variant::ito_strat);
  Rng rng(3);
  CHECK_THROWS_AS(predicted_rate(spec, LevyModel::onedim_symmetric_stable(1.0, 1.0), 0.1, 1e-3, rng),
                  HypothesisViolation);
}

TEST_CASE("one-dimensional reduction of exp1d") {
  const Reduction1D red(exp1d());
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng);
    CHECK(red.f(x) == Approx(std::expm1(x)).epsilon(1e-10));
    CHECK(red.f_inverse(red.f(x)) == Approx(x).epsilon(1e-9));
    CHECK(red.f_inverse_fast(red.f(x)) == Approx(x).epsilon(1e-8));
  }
  const auto [lo, hi] = red.boundaries();
  CHECK(lo == Approx(-0.63212).epsilon(1e-5));
  CHECK(hi == Approx(1.71828).epsilon(1e-5));
  CHECK(red.rate_factor(1.0) == Approx(1.0821).epsilon(1e-4));
  const auto model = LevyModel::onedim_symmetric_stable(1.0, 1.0);
  CHECK(red.predicted_rate(model, 0.01) == Approx(2.0 * 1.08198 * 0.01).epsilon(1e-4));
}

TEST_CASE("reduction of an additive system is the identity") {
  const System add{Potential::quadratic(Mat::Identity(1, 1)), NoiseField::constant(Mat::Identity(1, 1)),
                   Domain::box(vec({-0.5}), vec({2.0}))};
  const Reduction1D red(add);
  CHECK(red.f(0.7) == Approx(0.7));
  CHECK(red.rate_factor(1.5) == Approx((std::pow(0.5, -1.5) + std::pow(2.0, -1.5)) / 2.0));
}

TEST_CASE("ellipticity is required") {
  const System bad{Potential::quadratic(Mat::Identity(1, 1)), NoiseField::diagonal_scalar(1, 0.0),
                   Domain::box(vec({-1.0}), vec({1.0}))};
  CHECK_THROWS_AS(Reduction1D{bad}, PreconditionError);
}
