#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/integrators.hpp"
#include "heavytail/levy_model.hpp"
#include "heavytail/system.hpp"

namespace hte {

using Json = nlohmann::json;

/// `system` section. `parameters` carries the knobs of the named pieces:
///   quadratic: K (matrix) or curvature (scalar) with n
///   quartic_radial: n, k
///   constant: F (n x m matrix)
///   diagonal_scalar: n, g
///   box: lower, upper;  ball: n, radius
struct SystemSpec {
  std::string potential = "quadratic";
  std::string noise_field = "example1";
  std::string domain = "box";
  Json parameters = Json::object();

  System build() const;
};

/// `levy` section.
struct LevySpec {
  std::string variant = "isotropic_stable";
  double alpha = 1.0;
  double c = 1.0;
  std::optional<Mat> A;
  std::optional<Vec> mu;
  double rate = 1.0;
  std::string spectral = "isotropic";
  int dimension = 0;  ///< 0: inferred from the noise field

  LevyModel build(int noise_dim) const;
};

/// `run` section.
struct RunSpec {
  std::string scheme = "ito";
  std::vector<double> epsilons{0.1, 0.05, 0.01};
  double rho = 0.5;
  long trials = 1000;
  std::uint64_t seed = 1;
  /// Horizon in mean lifetimes 1/lambda_eps; with eps = 0 it is read in time units.
  double horizon_factor = 50.0;
  std::vector<double> u_grid{-0.5, 0.5, 1.0, 2.0};
  double step = 1e-3;
  double sub_delta = 0.0;
  std::optional<Vec> x0;
  std::optional<double> horizon;  ///< absolute horizon, overrides horizon_factor
};

/// `output` section; empty paths disable the corresponding file.
struct OutputSpec {
  std::string records_path = "records.csv";
  std::string report_path = "report.json";
  std::string grid_path = "exit_sets.csv";
};

struct ExperimentConfig {
  SystemSpec system;
  LevySpec levy;
  RunSpec run;
  OutputSpec output;
  Json echo = Json::object();  ///< the document the config was parsed from

  /// Throws ConfigError naming the offending key.
  static ExperimentConfig from_json(const Json& doc);
  void validate() const;
  Scheme scheme() const { return Scheme::parse(run.scheme); }
};

/// Reads and parses a JSON file. Missing files and syntax errors raise
/// ConfigError; syntax errors report line and column.
Json load_config_file(const std::string& path);

/// Applies "dotted.key=value". The value is parsed as JSON when possible and
/// kept as a string otherwise.
void apply_override(Json& doc, const std::string& assignment);

}  // namespace hte
