// Command-line driver: simulate, exit-sets, predict, verify, reduce.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "heavytail/config.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/exit_analysis.hpp"
#include "heavytail/experiment.hpp"
#include "heavytail/sampler.hpp"

namespace {

using namespace hte;

constexpr int kOk = 0;
constexpr int kAcceptanceFailure = 1;
constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::vector<double> epsilons;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required();
  cmd->add_option("--override", c.overrides, "Set a config key: section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--trials", c.trials, "Trials per epsilon");
  cmd->add_option("--epsilon", c.epsilons, "Noise intensity (repeatable; replaces run.epsilons)");
  cmd->add_flag("--quiet", c.quiet, "Only print errors and the final status");
}

ExperimentConfig load(const Common& c) {
  Json doc = load_config_file(c.config);
  for (const auto& o : c.overrides) apply_override(doc, o);
  if (c.seed) doc["run"]["seed"] = *c.seed;
  if (c.trials) doc["run"]["trials"] = *c.trials;
  if (!c.epsilons.empty()) doc["run"]["epsilons"] = c.epsilons;
  return ExperimentConfig::from_json(doc);
}

std::string f4(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

void print_summary(const EpsilonResult& r) {
  std::ostringstream s;
  s << "eps=" << f4(r.epsilon) << " N=" << r.n_trials << " exited=" << r.n_exited
    << " truncated=" << r.n_truncated << " failed=" << r.n_failed;
  if (r.n_exited > 0)
    s << " mean_tau=" << f4(r.tau.mean) << " ci95=[" << f4(r.tau.ci_low) << "," << f4(r.tau.ci_high) << "]";
  if (r.has_prediction) {
    s << " predicted=" << f4(r.predicted_mean);
    if (r.n_exited > 0) s << " normalized=" << f4(r.normalized_mean) << "+/-" << f4(r.normalized_stderr);
  }
  if (r.n_exited > 0) s << " big_jump_frac=" << f4(r.big_jump_fraction);
  if (r.ks) s << " ks=" << (r.ks->pass ? "pass" : "fail") << "(D=" << f4(r.ks->statistic) << ")";
  if (!r.healthy) s << " UNHEALTHY";
  if (r.no_exit) s << " NO-EXIT";
  std::cout << s.str() << std::endl;
}

void dump_events(const ExperimentConfig& cfg, const std::string& path) {
  const System sys = cfg.system.build();
  const LevyModel model = cfg.levy.build(sys.m());
  SamplerConfig sc;
  sc.epsilon = cfg.run.epsilons.front();
  sc.rho = cfg.run.rho;
  sc.step = cfg.run.step;
  sc.sub_delta = cfg.run.sub_delta;
  const double horizon = cfg.run.horizon.value_or(1.0);
  Rng rng = make_rng(cfg.run.seed, 0, 0);
  const auto events = generate_event_stream(model, sc, horizon, rng);
  std::ostringstream out;
  write_event_stream_csv(out, events, model.dimension());
  atomic_write(path, out.str());
}

int cmd_simulate(const Common& c, bool verify, double tolerance, const std::string& events_path) {
  const ExperimentConfig cfg = load(c);
  if (!events_path.empty()) dump_events(cfg, events_path);
  RunOptions opts;
  if (!c.quiet) opts.on_epsilon = print_summary;
  const ExperimentReport rep = run_experiment(cfg, opts);
  if (!c.quiet) {
    if (!cfg.output.records_path.empty()) std::cout << "records: " << cfg.output.records_path << "\n";
    if (!cfg.output.report_path.empty()) std::cout << "report: " << cfg.output.report_path << "\n";
  }
  if (!verify) return kOk;

  VerifyTolerances tol;
  tol.normalized_mean = tolerance;
  bool all = true;
  for (const auto& chk : verify_report(rep, tol)) {
    all = all && chk.pass;
    if (!c.quiet || !chk.pass)
      std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name << ": " << chk.detail << "\n";
  }
  std::cout << (all ? "verify: PASS" : "verify: FAIL") << std::endl;
  return all ? kOk : kAcceptanceFailure;
}

int cmd_exit_sets(const Common& c, double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw ConfigError("grid", "need lo < hi and step > 0");
  const ExperimentConfig cfg = load(c);
  if (cfg.output.grid_path.empty()) throw ConfigError("output.grid_path", "required by exit-sets");
  const System sys = cfg.system.build();
  const int m = sys.m();
  if (m > 2) throw ConfigError("system.noise_field", "exit-sets grids support one or two noise dimensions");
  const ExitSetSpec ito = ExitSetSpec::make(sys, ExitSetSpec::Variant::ito_strat);
  const ExitSetSpec mar = ExitSetSpec::make(sys, ExitSetSpec::Variant::marcus);
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;

  std::ostringstream out;
  out << (m == 1 ? "z1" : "z1,z2") << ",in_E,in_E_marcus\n";
  char buf[64];
  auto emit = [&](const Vec& z) {
    for (int d = 0; d < m; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", z(d));
      out << (d ? "," : "") << buf;
    }
    out << ',' << (exit_indicator(ito, z) ? 1 : 0) << ',' << (exit_indicator(mar, z) ? 1 : 0) << '\n';
  };
  for (long i = 0; i < n; ++i) {
    const double z1 = lo + step * static_cast<double>(i);
    if (m == 1) {
      emit(vec({z1}));
    } else {
      for (long j = 0; j < n; ++j) emit(vec({z1, lo + step * static_cast<double>(j)}));
    }
  }
  atomic_write(cfg.output.grid_path, out.str());
  if (!c.quiet) std::cout << "grid: " << cfg.output.grid_path << " (" << (m == 1 ? n : n * n) << " points)\n";
  return kOk;
}

int cmd_predict(const Common& c, const std::string& method_name, double precision) {
  const ExperimentConfig cfg = load(c);
  const System sys = cfg.system.build();
  const LevyModel model = cfg.levy.build(sys.m());
  MeasureMethod method = MeasureMethod::automatic;
  if (method_name == "mc") method = MeasureMethod::monte_carlo;
  else if (method_name == "quadrature") method = MeasureMethod::quadrature;
  else if (method_name != "auto") throw ConfigError("--method", "expected auto, mc or quadrature");
  if (!model.has_jumps()) throw HypothesisViolation("the Levy model has no jumps, so m(E) = 0 and no exit rate is predicted");

  const Scheme scheme = cfg.scheme();
  const auto variant = scheme.kind == Scheme::Kind::marcus ? ExitSetSpec::Variant::marcus
                                                           : ExitSetSpec::Variant::ito_strat;
  const ExitSetSpec spec = ExitSetSpec::make(sys, variant);
  Rng rng = make_rng(cfg.run.seed, 0xE5E7ULL, 0);
  const RateEstimate base = predicted_rate(spec, model, 1.0, precision, rng, method);
  std::cout << "scheme=" << scheme.name() << " exit_set=" << spec.name() << " m=" << base.m
            << " stderr=" << base.m_stderr << " r_min=" << spec.r_min << "\n";
  for (double e : cfg.run.epsilons) {
    if (!(e > 0.0)) {
      std::cout << "eps=0: no noise, no exit\n";
      continue;
    }
    const double h = model.tail(1.0 / e);
    const double lambda = base.m * h;
    std::printf("eps=%g lambda=%.6g stderr=%.3g mean_exit=%.6g\n", e, lambda, base.m_stderr * h, 1.0 / lambda);
  }
  return kOk;
}

int cmd_reduce(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const System sys = cfg.system.build();
  const LevyModel model = cfg.levy.build(sys.m());
  const Reduction1D red(sys);
  const auto [lo, hi] = red.boundaries();
  std::printf("domain=(%.6g, %.6g)\n", -red.a(), red.b());
  std::printf("boundaries=(%.4f, %.4f)\n", lo, hi);
  if (model.has_jumps() && model.symmetric()) {
    std::printf("M=%.6g alpha=%g\n", red.rate_factor(model.alpha()), model.alpha());
    for (double e : cfg.run.epsilons)
      if (e > 0.0) std::printf("eps=%g predicted_rate=%.6g mean_exit=%.6g\n", e, red.predicted_rate(model, e),
                               1.0 / red.predicted_rate(model, e));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exit times of small-noise SDEs driven by heavy-tailed Levy processes"};
  app.require_subcommand(1);

  Common sim_c, ver_c, set_c, pred_c, red_c;
  std::string events_path;
  double tolerance = 0.05;
  double lo = -4.0, hi = 4.0, step = 0.05;
  std::string method = "auto";
  double precision = 2e-3;

  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo campaign and write records and report");
  add_common(sim, sim_c);
  sim->add_option("--dump-events", events_path, "Also write the event stream of trial 0 at the first epsilon");

  auto* ver = app.add_subcommand("verify", "Simulate, then check the exponential limit law");
  add_common(ver, ver_c);
  ver->add_option("--tolerance", tolerance, "Allowed |lambda*mean(tau) - 1|")->check(CLI::PositiveNumber);

  auto* sets = app.add_subcommand("exit-sets", "Tabulate both exit-set indicators on a grid");
  add_common(sets, set_c);
  sets->add_option("--lo", lo, "Grid lower bound");
  sets->add_option("--hi", hi, "Grid upper bound");
  sets->add_option("--step", step, "Grid spacing");

  auto* pred = app.add_subcommand("predict", "Print the limit measure and predicted exit rates");
  add_common(pred, pred_c);
  pred->add_option("--method", method, "auto, mc or quadrature");
  pred->add_option("--precision", precision, "Monte Carlo target standard error");

  auto* red = app.add_subcommand("reduce", "Print the one-dimensional additive reduction");
  add_common(red, red_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_c, false, tolerance, events_path);
    if (ver->parsed()) return cmd_simulate(ver_c, true, tolerance, "");
    if (sets->parsed()) return cmd_exit_sets(set_c, lo, hi, step);
    if (pred->parsed()) return cmd_predict(pred_c, method, precision);
    if (red->parsed()) return cmd_reduce(red_c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kUsageError;
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violated: " << e.what() << std::endl;
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kRuntimeError;
  }
  return kUsageError;
}
