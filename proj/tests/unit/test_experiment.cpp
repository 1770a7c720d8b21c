#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heavytail/errors.hpp"
#include "heavytail/experiment.hpp"
#include "heavytail/statistics.hpp"

using namespace hte;
using doctest::Approx;

namespace {

std::vector<double> exponential_samples(double lambda, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::exponential_distribution<double> e(lambda);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = e(rng);
  return out;
}

Json small_config() {
  return Json::parse(R"({
    "system": {"potential": "quadratic", "noise_field": "example1", "domain": "box",
               "parameters": {"lower": [-1.0], "upper": [1.0]}},
    "levy": {"variant": "isotropic_stable", "dimension": 2, "alpha": 1.0, "c": 1.0},
    "run": {"scheme": "ito", "epsilons": [0.2], "trials": 40, "seed": 5, "step": 0.01},
    "output": {"records_path": "", "report_path": "", "grid_path": ""}
  })");
}

}  // namespace

TEST_CASE("summary statistics") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const SampleSummary s = summarize(x);
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.ci_high - s.ci_low == Approx(2.0 * 1.96 * s.stderr_));
}

TEST_CASE("empirical Laplace transform") {
  const auto t = exponential_samples(0.3, 20000, 1);
  CHECK(empirical_laplace(t, 0.3, 0.0).value == 1.0);
  const LaplaceValue v = empirical_laplace(t, 0.3, 1.0);
  CHECK(std::abs(v.value - 0.5) < 3.0 * v.stderr_);
  const LaplaceValue w = empirical_laplace(t, 0.3, -0.5);
  CHECK(std::abs(w.value - 2.0) < 4.0 * w.stderr_);
  CHECK_THROWS_AS(empirical_laplace(t, 0.3, -1.0), DomainError);
  CHECK_THROWS_AS(empirical_laplace({}, 0.3, 1.0), UndefinedResult);
}

TEST_CASE("KS test calibration") {
  int pass = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) pass += ks_exponential(exponential_samples(1.0, 10000, 100 + r)).pass;
  // about 95% of exact samples pass
  CHECK(pass >= 180);
  CHECK(pass < reps);

  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> uni(10000);
  for (auto& x : uni) x = u(rng);
  CHECK(!ks_exponential(uni).pass);
  CHECK_THROWS_AS(ks_exponential(std::vector<double>(99, 1.0)), PreconditionError);
}

TEST_CASE("config parsing rejects unknown keys and bad ranges") {
  Json doc = small_config();
  CHECK_NOTHROW(ExperimentConfig::from_json(doc));

  Json extra = doc;
  extra["run"]["walltime"] = 3;
  try {
    ExperimentConfig::from_json(extra);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "run.walltime");
  }

  Json bad_u = doc;
  bad_u["run"]["u_grid"] = {0.5, -1.0};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_u), ConfigError);
  Json bad_n = doc;
  bad_n["run"]["trials"] = 0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_n), ConfigError);
  Json bad_eps = doc;
  bad_eps["run"]["epsilons"] = {1.5};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_eps), ConfigError);
  Json bad_dim = doc;
  bad_dim["levy"]["dimension"] = 3;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_dim), ConfigError);
}

TEST_CASE("overrides") {
  Json doc = small_config();
  apply_override(doc, "run.trials=10");
  apply_override(doc, "run.epsilons=[0.1]");
  apply_override(doc, "run.scheme=marcus");
  const auto cfg = ExperimentConfig::from_json(doc);
  CHECK(cfg.run.trials == 10);
  CHECK(cfg.run.epsilons == std::vector<double>{0.1});
  CHECK(cfg.run.scheme == "marcus");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
}

TEST_CASE("missing config files name the path") {
  try {
    load_config_file("/nonexistent/cfg.json");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/cfg.json") != std::string::npos);
  }
}

TEST_CASE("a noiseless run is truncated and flagged") {
  Json doc = small_config();
  doc["run"]["epsilons"] = {0.0};
  doc["run"]["trials"] = 1;
  doc["run"]["horizon_factor"] = 3.0;
  const auto rep = run_experiment(ExperimentConfig::from_json(doc), {1, false, {}});
  REQUIRE(rep.results.size() == 1);
  const auto& r = rep.results[0];
  CHECK(r.n_truncated == 1);
  CHECK(r.no_exit);
  CHECK(!r.has_prediction);
  CHECK(r.horizon == 3.0);
  CHECK(r.n_exited + r.n_truncated + r.n_failed == r.n_trials);
}

TEST_CASE("records do not depend on the worker count") {
  const auto cfg = ExperimentConfig::from_json(small_config());
  std::ostringstream a, b;
  write_records_csv(a, run_experiment(cfg, {1, false, {}}));
  write_records_csv(b, run_experiment(cfg, {3, false, {}}));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("trial,epsilon,scheme,tau,n_big_jumps,exit_at_big_jump,truncated,exit_x1\n", 0) == 0);
}

TEST_CASE("report fields are consistent") {
  const auto rep = run_experiment(ExperimentConfig::from_json(small_config()), {1, false, {}});
  const auto& r = rep.results.at(0);
  CHECK(r.n_exited + r.n_truncated + r.n_failed == r.n_trials);
  CHECK(r.has_prediction);
  CHECK(r.lambda == Approx(2.0 * std::sqrt(2.0) * 0.2).epsilon(1e-4));
  CHECK(r.laplace.size() == 4);
  CHECK(!r.ks.has_value());  // fewer than 100 exits
  const Json j = report_to_json(rep);
  CHECK(j["results"][0]["counts"]["trials"] == 40);
  CHECK(j["config"]["run"]["seed"] == 5);
  CHECK(j.contains("reference"));
}

TEST_CASE("atomic writes replace the target") {
  const auto dir = std::filesystem::temp_directory_path() / "hte_atomic_test";
  const std::string path = (dir / "out.txt").string();
  atomic_write(path, "first");
  atomic_write(path, "second");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "second");
  CHECK(!std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("exit statistics do not depend on the jump split") {
  std::vector<double> means, errs;
  for (double rho : {0.3, 0.5, 0.7}) {
    Json doc = small_config();
    doc["run"]["epsilons"] = {0.1};
    doc["run"]["trials"] = 600;
    doc["run"]["step"] = 1e-3;
    doc["run"]["rho"] = rho;
    const auto rep = run_experiment(ExperimentConfig::from_json(doc), {1, false, {}});
    means.push_back(rep.results[0].normalized_mean);
    errs.push_back(rep.results[0].normalized_stderr);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(means[i] - means[j]) <= 3.0 * std::hypot(errs[i], errs[j]));
}
