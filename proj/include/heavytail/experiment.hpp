#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "heavytail/config.hpp"
#include "heavytail/integrators.hpp"
#include "heavytail/statistics.hpp"

namespace hte {

inline constexpr const char* kVersion = "heavytail_exit 0.1.0";

struct LaplaceRow {
  double u = 0.0;
  double empirical = 0.0;
  double theoretical = 0.0;  ///< 1 / (1 + u)
  double stderr_ = 0.0;
  /// exp(-u lambda horizon): the value each truncated trial would contribute at least.
  double truncated_bound = 0.0;
};

struct EpsilonResult {
  double epsilon = 0.0;
  double horizon = 0.0;
  long n_trials = 0;
  long n_exited = 0;
  long n_truncated = 0;
  long n_failed = 0;

  SampleSummary tau;  ///< over exited trials

  bool has_prediction = false;
  double lambda = 0.0;
  double lambda_stderr = 0.0;
  double predicted_mean = 0.0;
  double normalized_mean = 0.0;
  double normalized_stderr = 0.0;

  std::vector<LaplaceRow> laplace;
  std::optional<KsResult> ks;

  double big_jump_fraction = 0.0;
  double big_jump_fraction_stderr = 0.0;
  double big_jump_rate = 0.0;
  double big_jump_threshold = 0.0;

  bool healthy = true;  ///< failed trials below 0.1%
  bool no_exit = false;  ///< no trial left G before the horizon
  std::vector<std::string> notes;

  std::vector<ExitRecord> records;  ///< indexed by trial
};

struct ExperimentReport {
  std::string scheme;
  std::string exit_set;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double m = 0.0;
  double m_stderr = 0.0;
  std::string m_method;
  std::vector<EpsilonResult> results;
  Json config_echo;
  /// Reference values and known discrepancies relevant to the configured system.
  Json reference = Json::object();
  int state_dimension = 1;

  bool healthy() const;
};

struct RunOptions {
  /// 0: HEAVYTAIL_EXIT_WORKERS, else hardware concurrency.
  int workers = 0;
  bool write_outputs = true;
  /// Called once per finished epsilon.
  std::function<void(const EpsilonResult&)> on_epsilon;
};

/// Worker count from HEAVYTAIL_EXIT_WORKERS or the hardware.
int default_workers();

/// Runs every epsilon of the campaign. Trials are fanned out over workers;
/// trial i at epsilon index k draws from the stream derived from
/// (seed, k, i), so results do not depend on the worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Records CSV; one row per trial and epsilon, in order.
void write_records_csv(std::ostream& out, const ExperimentReport& report);
Json report_to_json(const ExperimentReport& report);

/// Writes via a sibling temporary file and rename.
void atomic_write(const std::string& path, const std::string& contents);

struct AcceptanceCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyTolerances {
  double normalized_mean = 0.05;
  double laplace_sigmas = 3.0;
  double big_jump_fraction = 0.95;
};

/// Checks of the exponential limit law on the smallest positive epsilon, plus
/// health of every epsilon and the convergence trend across epsilons.
std::vector<AcceptanceCheck> verify_report(const ExperimentReport& report, const VerifyTolerances& tol = {});

}  // namespace hte
