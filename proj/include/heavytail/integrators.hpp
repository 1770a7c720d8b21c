#pragma once

#include <span>
#include <string>
#include <vector>

#include "heavytail/levy_model.hpp"
#include "heavytail/sampler.hpp"
#include "heavytail/system.hpp"

namespace hte {

struct Scheme {
  enum class Kind { ito, stratonovich, marcus, wong_zakai };
  Kind kind = Kind::ito;
  /// Polygon vertices per unit time; only meaningful for wong_zakai.
  int subdivisions = 0;

  static Scheme ito() { return {Kind::ito, 0}; }
  static Scheme stratonovich() { return {Kind::stratonovich, 0}; }
  static Scheme marcus() { return {Kind::marcus, 0}; }
  static Scheme wong_zakai(int n) { return {Kind::wong_zakai, n}; }

  /// "ito", "stratonovich", "marcus" or "wong_zakai:<n>".
  static Scheme parse(const std::string& s);
  std::string name() const;
};

struct StepConfig {
  double epsilon = 0.01;
  /// Drift substeps satisfy ||grad U(x)|| dt_sub <= step_cap.
  double step_cap = 0.1;
  double flow_tol = 1e-8;
  /// Time resolution of the exit-time bisection inside a continuous substep.
  double exit_time_tol = 1e-6;
};

struct ExitRecord {
  double tau = 0.0;
  Vec exit_position;
  bool exited_at_big_jump = false;
  int n_big_jumps = 0;
  bool truncated = false;
  /// Numerical blow-up or flow failure; excluded from statistics.
  bool failed = false;
  std::string failure;
};

struct StatePoint {
  double t;
  Vec x;
};

/// Optional per-trial observations.
struct TrialDiagnostics {
  /// For every big jump: time since the previous big jump (or start) and ||X_{tau_k-}||.
  std::vector<std::pair<double, double>> pre_jump;
  /// State after every event, when enabled.
  bool record_path = false;
  std::vector<StatePoint> path;
};

/// One continuous segment: x' = x - grad U(x) dt + eps F(x) dL for ito;
/// stratonovich adds (eps^2/2) sum d_l F_ij F_lk A_jk dt; marcus replaces the
/// linear noise term by the time-1 flow of F(.) eps dL (fourth-order RK), whose
/// mean second-order term is the same correction. The segment is split into
/// equal substeps (dt and dL both divided) so that ||grad U|| dt_sub <= step_cap.
Vec segment_step(const Scheme& scheme, const Vec& x, double dt, const Vec& dL,
                 const System& system, const Mat& brownian_cov, const StepConfig& cfg);

/// Big jump eps J: x + eps F(x) J for ito/stratonovich, phi^{eps J}(x) for marcus.
/// A Marcus flow that fails but whose partial trajectory leaves G returns the
/// first partial state outside G; otherwise NumericalFailure is thrown.
Vec apply_big_jump(const Scheme& scheme, const Vec& x, const Vec& epsJ, const System& system,
                   const StepConfig& cfg);

/// Runs one trial from x0 until the first exit from G or the horizon.
ExitRecord simulate_until_exit(const Scheme& scheme, const System& system, const LevyModel& model,
                               const SamplerConfig& sampler, const StepConfig& cfg, const Vec& x0,
                               double horizon, Rng rng, TrialDiagnostics* diag = nullptr);

/// Same, consuming an explicit event stream.
ExitRecord simulate_until_exit(const Scheme& scheme, const System& system, const LevyModel& model,
                               EventStream& stream, const StepConfig& cfg, const Vec& x0,
                               TrialDiagnostics* diag = nullptr);

/// Brownian path sampled on a uniform grid: values[k] = Z(k dt), values[0] = 0.
struct GridPath {
  double dt = 0.0;
  std::vector<Vec> values;
  double duration() const { return dt * static_cast<double>(values.size() - 1); }
};

/// Samples a Brownian path with covariance A on [0, duration].
GridPath sample_brownian_path(const Mat& A, double duration, double dt, Rng& rng);

/// Terminal state of the ODE driven by the polygonal interpolation of the path
/// with n vertices per unit time (Lebesgue–Stieltjes integral, adaptive RK).
Vec wong_zakai_path(const System& system, const GridPath& path, int n, double eps, const Vec& x0,
                    double tol = 1e-9);

/// Terminal state of segment_step applied to every grid increment of the path.
Vec integrate_on_path(const Scheme& scheme, const System& system, const Mat& brownian_cov,
                      const GridPath& path, double eps, const Vec& x0, double step_cap = 0.1);

}  // namespace hte
