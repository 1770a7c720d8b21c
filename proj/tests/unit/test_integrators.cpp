#include <doctest.h>

#include <cmath>
#include <limits>

#include "heavytail/errors.hpp"
#include "heavytail/integrators.hpp"

using namespace hte;
using doctest::Approx;

namespace {

System additive2() {
  Mat F(2, 2);
  F << 0.8, 0.3, -0.2, 0.5;
  return {Potential::quadratic(Mat::Identity(2, 2)), NoiseField::constant(F), Domain::ball(2, 1.0)};
}

System exp1d() {
  return {Potential::quadratic(Mat::Identity(1, 1)), NoiseField::exp1d(), Domain::box(vec({-1.0}), vec({1.0}))};
}

System example1() {
  return {Potential::quadratic(Mat::Identity(1, 1)), NoiseField::example1(), Domain::box(vec({-1.0}), vec({1.0}))};
}

const Scheme kSchemes[] = {Scheme::ito(), Scheme::stratonovich(), Scheme::marcus()};

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (const char* s : {"ito", "stratonovich", "marcus", "wong_zakai:64"}) CHECK(Scheme::parse(s).name() == s);
  CHECK_THROWS(Scheme::parse("milstein"));
}

TEST_CASE("constant fields make the schemes coincide on a step") {
  const System sys = additive2();
  StepConfig cfg;
  cfg.epsilon = 0.3;
  const Mat A = Mat::Identity(2, 2);
  const Vec x = vec({0.2, -0.1});
  const Vec dL = vec({0.05, -0.02});
  const Vec ref = segment_step(Scheme::ito(), x, 0.01, dL, sys, A, cfg);
  for (const auto& s : kSchemes) CHECK((segment_step(s, x, 0.01, dL, sys, A, cfg) - ref).norm() == 0.0);
  const Vec J = vec({2.0, -1.0});
  for (const auto& s : kSchemes)
    CHECK((apply_big_jump(s, x, J, sys, cfg) - (x + sys.field.value(x) * J)).norm() < 1e-12);
}

TEST_CASE("pure-jump models carry no Stratonovich correction") {
  const System sys = example1();
  StepConfig cfg;
  cfg.epsilon = 0.1;
  const Mat A = Mat::Zero(2, 2);
  const Vec x = vec({0.3});
  const Vec dL = vec({0.01, 0.02});
  CHECK((segment_step(Scheme::stratonovich(), x, 1e-3, dL, sys, A, cfg) -
         segment_step(Scheme::ito(), x, 1e-3, dL, sys, A, cfg)).norm() == 0.0);
}

TEST_CASE("exp1d correction per unit time") {
  const System sys = exp1d();
  StepConfig cfg;
  cfg.epsilon = 0.2;
  const Mat A = Mat::Identity(1, 1);
  const Vec x = vec({0.4});
  const double dt = 1e-3;
  const Vec dL = zeros(1);
  const double diff = segment_step(Scheme::stratonovich(), x, dt, dL, sys, A, cfg)(0) -
                      segment_step(Scheme::ito(), x, dt, dL, sys, A, cfg)(0);
  CHECK(diff / dt == Approx(-0.5 * 0.04 * std::exp(-0.8)).epsilon(1e-9));
}

TEST_CASE("big jumps on exp1d") {
  const System sys = exp1d();
  StepConfig cfg;
  CHECK(apply_big_jump(Scheme::marcus(), zeros(1), vec({1.0}), sys, cfg)(0) == Approx(std::log(2.0)).epsilon(1e-8));
  CHECK(apply_big_jump(Scheme::ito(), zeros(1), vec({1.0}), sys, cfg)(0) == 1.0);
  for (const auto& s : kSchemes) CHECK(apply_big_jump(s, vec({0.2}), zeros(1), sys, cfg)(0) == 0.2);
}

TEST_CASE("a Marcus jump beyond the flow's blow-up exits G") {
  // ln(1 + z) has no value for z <= -1; the path still leaves (-1, 1) first.
  const System sys = exp1d();
  const Vec y = apply_big_jump(Scheme::marcus(), zeros(1), vec({-3.0}), sys, StepConfig{});
  CHECK(!sys.domain.contains(y));
}

TEST_CASE("trial preconditions and the noiseless case") {
  const System sys = example1();
  const auto model = LevyModel::isotropic_stable(2, 1.0, 1.0);
  SamplerConfig sc{0.0, 0.5, 1e-2, 0.0};
  StepConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(simulate_until_exit(Scheme::ito(), sys, model, sc, cfg, vec({1.5}), 1.0, Rng(1)),
                  PreconditionError);
  const ExitRecord r = simulate_until_exit(Scheme::ito(), sys, model, sc, cfg, vec({0.5}), 5.0, Rng(1));
  CHECK(r.truncated);
  CHECK(r.tau == 5.0);
  CHECK(r.n_big_jumps == 0);
  CHECK_THROWS(simulate_until_exit(Scheme::wong_zakai(8), sys, model, sc, cfg, zeros(1), 1.0, Rng(1)));
}

TEST_CASE("shared event streams give identical exits under additive noise") {
  const System sys = additive2();
  const auto model = LevyModel::isotropic_stable(2, 1.0, 1.0);
  SamplerConfig sc{0.1, 0.5, 1e-3, 0.0};
  StepConfig cfg;
  cfg.epsilon = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    ExitRecord rec[3];
    TrialDiagnostics diag[3];
    for (int s = 0; s < 3; ++s) {
      diag[s].record_path = true;
      EventStream stream(model, sc, 200.0, make_rng(5, 0, trial));
      rec[s] = simulate_until_exit(kSchemes[s], sys, model, stream, cfg, zeros(2), &diag[s]);
    }
    for (int s = 1; s < 3; ++s) {
      CHECK(rec[s].tau == rec[0].tau);
      CHECK(rec[s].exited_at_big_jump == rec[0].exited_at_big_jump);
      REQUIRE(diag[s].path.size() == diag[0].path.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < diag[0].path.size(); ++k)
        worst = std::max(worst, (diag[s].path[k].x - diag[0].path[k].x).norm());
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("example1 Marcus trials exit through big jumps") {
  const System sys = example1();
  const auto model = LevyModel::isotropic_stable(2, 1.0, 1.0);
  SamplerConfig sc{0.05, 0.5, 1e-3, 0.0};
  StepConfig cfg;
  cfg.epsilon = 0.05;
  int big = 0;
  const int n = 200;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ExitRecord r = simulate_until_exit(Scheme::marcus(), sys, model, sc, cfg, zeros(1), 1e4, make_rng(3, 0, i));
    REQUIRE(!r.failed);
    REQUIRE(!r.truncated);
    CHECK(!sys.domain.contains(r.exit_position));
    big += r.exited_at_big_jump;
    sum += r.tau;
  }
  CHECK(big >= 0.9 * n);
  // mean exit time is of the order 0.35 / eps = 7
  CHECK(sum / n > 4.0);
  CHECK(sum / n < 10.0);
}

TEST_CASE("Wong-Zakai polygons approach the Stratonovich solution") {
  const System sys = exp1d();
  const Mat A = Mat::Identity(1, 1);
  Rng rng(21);
  const GridPath path = sample_brownian_path(A, 1.0, 1.0 / 4096, rng);
  const double eps = 0.5;
  const Vec ref = integrate_on_path(Scheme::stratonovich(), sys, A, path, eps, zeros(1));
  double prev = std::numeric_limits<double>::infinity();
  std::vector<double> gaps;
  for (int n : {16, 32, 64, 128}) gaps.push_back(std::abs(wong_zakai_path(sys, path, n, eps, zeros(1))(0) - ref(0)));
  for (double g : gaps) {
    CHECK(g < std::max(prev, 0.5));
    prev = g;
  }
  CHECK(gaps.back() < gaps.front());

  // constant fields: Wong-Zakai and Ito agree up to the drift discretisation
  const System add = additive2();
  const GridPath p2 = sample_brownian_path(Mat::Identity(2, 2), 1.0, 1.0 / 1024, rng);
  const Vec wz = wong_zakai_path(add, p2, 1024, 0.2, zeros(2));
  const Vec it = integrate_on_path(Scheme::ito(), add, Mat::Identity(2, 2), p2, 0.2, zeros(2));
  CHECK((wz - it).norm() < 5e-3);
}
