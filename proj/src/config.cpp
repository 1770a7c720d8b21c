#include "heavytail/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "heavytail/errors.hpp"

namespace hte {
namespace {

void reject_unknown(const Json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [k, _] : obj.items())
    if (!allowed.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

double num(const Json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

Vec to_vec(const Json& j, const std::string& key) {
  if (j.is_number()) return vec({j.get<double>()});
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(key, "expected a non-empty numeric array of length <= 8");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = num(j[i], key);
  return v;
}

Mat to_mat(const Json& j, const std::string& key) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(key, "expected a matrix as an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0 || cols > static_cast<std::size_t>(kMaxDim)) throw ConfigError(key, "expected a matrix as an array of rows");
  Mat M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(key, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = num(j[r][c], key);
  }
  return M;
}

std::string str(const Json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

std::vector<double> num_list(const Json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) throw ConfigError(key, "expected a non-empty numeric array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(num(e, key));
  return out;
}

int infer_dimension(const SystemSpec& s) {
  const Json& p = s.parameters;
  if (s.noise_field == "example1" || s.noise_field == "exp1d") return 1;
  if (p.contains("n")) return static_cast<int>(num(p["n"], "system.parameters.n"));
  if (p.contains("K")) return static_cast<int>(to_mat(p["K"], "system.parameters.K").rows());
  if (p.contains("lower")) return static_cast<int>(to_vec(p["lower"], "system.parameters.lower").size());
  if (p.contains("F")) return static_cast<int>(to_mat(p["F"], "system.parameters.F").rows());
  return 1;
}

}  // namespace

System SystemSpec::build() const {
  const std::string pk = "system.parameters";
  const Json& p = parameters;
  const int n = infer_dimension(*this);
  if (n < 1 || n > kMaxDim) throw ConfigError(pk + ".n", "dimension must lie in [1, 8]");

  auto param = [&](const char* key) -> const Json& {
    if (!p.contains(key)) throw ConfigError(pk + "." + key, "required by the selected system");
    return p[key];
  };

  std::optional<Potential> pot;
  if (potential == "quadratic") {
    Mat K;
    if (p.contains("K")) K = to_mat(p["K"], pk + ".K");
    else K = Mat::Identity(n, n) * (p.contains("curvature") ? num(p["curvature"], pk + ".curvature") : 1.0);
    try { pot = Potential::quadratic(K); } catch (const std::exception& e) { throw ConfigError(pk + ".K", e.what()); }
  } else if (potential == "quartic_radial") {
    pot = Potential::quartic_radial(n, p.contains("k") ? num(p["k"], pk + ".k") : 1.0);
  } else {
    throw ConfigError("system.potential", "unknown potential '" + potential + "' (quadratic, quartic_radial)");
  }

  std::optional<NoiseField> field;
  if (noise_field == "example1") field = NoiseField::example1();
  else if (noise_field == "exp1d") field = NoiseField::exp1d();
  else if (noise_field == "constant") field = NoiseField::constant(to_mat(param("F"), pk + ".F"));
  else if (noise_field == "diagonal_scalar") field = NoiseField::diagonal_scalar(n, p.contains("g") ? num(p["g"], pk + ".g") : 1.0);
  else throw ConfigError("system.noise_field", "unknown noise field '" + noise_field + "' (example1, exp1d, constant, diagonal_scalar)");

  std::optional<Domain> dom;
  if (domain == "box") {
    Vec lo = p.contains("lower") ? to_vec(p["lower"], pk + ".lower") : Vec(Vec::Constant(n, -1.0));
    Vec hi = p.contains("upper") ? to_vec(p["upper"], pk + ".upper") : Vec(Vec::Constant(n, 1.0));
    try { dom = Domain::box(lo, hi); } catch (const std::exception& e) { throw ConfigError(pk + ".lower", e.what()); }
  } else if (domain == "ball") {
    try { dom = Domain::ball(n, p.contains("radius") ? num(p["radius"], pk + ".radius") : 1.0); }
    catch (const std::exception& e) { throw ConfigError(pk + ".radius", e.what()); }
  } else {
    throw ConfigError("system.domain", "unknown domain '" + domain + "' (box, ball)");
  }

  System sys{*pot, *field, *dom};
  try { sys.validate(); } catch (const std::exception& e) { throw ConfigError("system", e.what()); }
  return sys;
}

LevyModel LevySpec::build(int noise_dim) const {
  const int m = dimension > 0 ? dimension : noise_dim;
  if (m != noise_dim) throw ConfigError("levy.dimension", "must match the noise field's column count");
  try {
    switch (parse_levy_variant(variant)) {
      case LevyVariant::isotropic_stable:
        return LevyModel::isotropic_stable(m, alpha, c, A.value_or(Mat{}), mu.value_or(Vec{}));
      case LevyVariant::onedim_symmetric_stable:
        if (m != 1) throw ConfigError("levy.variant", "onedim_symmetric_stable needs a one-column noise field");
        return LevyModel::onedim_symmetric_stable(alpha, c, A ? (*A)(0, 0) : 0.0, mu ? (*mu)(0) : 0.0);
      case LevyVariant::compound_poisson_pareto:
        return LevyModel::compound_poisson_pareto(m, alpha, rate, parse_spectral(spectral), A.value_or(Mat{}),
                                                  mu.value_or(Vec{}));
      case LevyVariant::brownian:
        if (!A) throw ConfigError("levy.A", "required for the brownian variant");
        return LevyModel::brownian(*A, mu.value_or(Vec{}));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("levy", e.what());
  }
  throw ConfigError("levy.variant", "unsupported");
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  reject_unknown(doc, "", {"system", "levy", "run", "output"});
  ExperimentConfig cfg;
  cfg.echo = doc;

  if (doc.contains("system")) {
    const Json& s = doc["system"];
    reject_unknown(s, "system", {"potential", "noise_field", "domain", "parameters"});
    if (s.contains("potential")) cfg.system.potential = str(s["potential"], "system.potential");
    if (s.contains("noise_field")) cfg.system.noise_field = str(s["noise_field"], "system.noise_field");
    if (s.contains("domain")) cfg.system.domain = str(s["domain"], "system.domain");
    if (s.contains("parameters")) {
      reject_unknown(s["parameters"], "system.parameters",
                     {"n", "K", "curvature", "k", "F", "g", "lower", "upper", "radius"});
      cfg.system.parameters = s["parameters"];
    }
  }

  if (doc.contains("levy")) {
    const Json& l = doc["levy"];
    reject_unknown(l, "levy", {"variant", "alpha", "c", "A", "mu", "rate", "spectral", "dimension"});
    if (l.contains("variant")) cfg.levy.variant = str(l["variant"], "levy.variant");
    if (l.contains("alpha")) cfg.levy.alpha = num(l["alpha"], "levy.alpha");
    if (l.contains("c")) cfg.levy.c = num(l["c"], "levy.c");
    if (l.contains("A") && !l["A"].is_null()) cfg.levy.A = to_mat(l["A"], "levy.A");
    if (l.contains("mu") && !l["mu"].is_null()) cfg.levy.mu = to_vec(l["mu"], "levy.mu");
    if (l.contains("rate")) cfg.levy.rate = num(l["rate"], "levy.rate");
    if (l.contains("spectral")) cfg.levy.spectral = str(l["spectral"], "levy.spectral");
    if (l.contains("dimension")) cfg.levy.dimension = static_cast<int>(num(l["dimension"], "levy.dimension"));
  }

  if (doc.contains("run")) {
    const Json& r = doc["run"];
    reject_unknown(r, "run", {"scheme", "epsilons", "rho", "trials", "seed", "horizon_factor", "u_grid", "step",
                              "sub_delta", "x0", "horizon"});
    if (r.contains("scheme")) cfg.run.scheme = str(r["scheme"], "run.scheme");
    if (r.contains("epsilons")) cfg.run.epsilons = num_list(r["epsilons"], "run.epsilons");
    if (r.contains("rho")) cfg.run.rho = num(r["rho"], "run.rho");
    if (r.contains("trials")) {
      if (!r["trials"].is_number_integer()) throw ConfigError("run.trials", "expected an integer");
      cfg.run.trials = r["trials"].get<long>();
    }
    if (r.contains("seed")) {
      if (!r["seed"].is_number_integer() || r["seed"].get<long long>() < 0)
        throw ConfigError("run.seed", "expected a non-negative integer");
      cfg.run.seed = r["seed"].get<std::uint64_t>();
    }
    if (r.contains("horizon_factor")) cfg.run.horizon_factor = num(r["horizon_factor"], "run.horizon_factor");
    if (r.contains("u_grid")) cfg.run.u_grid = num_list(r["u_grid"], "run.u_grid");
    if (r.contains("step")) cfg.run.step = num(r["step"], "run.step");
    if (r.contains("sub_delta")) cfg.run.sub_delta = num(r["sub_delta"], "run.sub_delta");
    if (r.contains("x0") && !r["x0"].is_null()) cfg.run.x0 = to_vec(r["x0"], "run.x0");
    if (r.contains("horizon") && !r["horizon"].is_null()) cfg.run.horizon = num(r["horizon"], "run.horizon");
  }

  if (doc.contains("output")) {
    const Json& o = doc["output"];
    reject_unknown(o, "output", {"records_path", "report_path", "grid_path"});
    if (o.contains("records_path")) cfg.output.records_path = str(o["records_path"], "output.records_path");
    if (o.contains("report_path")) cfg.output.report_path = str(o["report_path"], "output.report_path");
    if (o.contains("grid_path")) cfg.output.grid_path = str(o["grid_path"], "output.grid_path");
  }

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  const System sys = system.build();
  const LevyModel model = levy.build(sys.m());
  (void)model;

  Scheme s;
  try { s = scheme(); } catch (const std::exception& e) { throw ConfigError("run.scheme", e.what()); }
  if (s.kind == Scheme::Kind::wong_zakai)
    throw ConfigError("run.scheme", "campaigns support ito, stratonovich and marcus");
  if (run.trials < 1) throw ConfigError("run.trials", "must be at least 1");
  for (double e : run.epsilons)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("run.epsilons", "values must lie in [0, 1]");
  if (!(run.rho > 0.0 && run.rho < 1.0)) throw ConfigError("run.rho", "must lie in (0, 1)");
  if (!(run.horizon_factor > 0.0) || !std::isfinite(run.horizon_factor))
    throw ConfigError("run.horizon_factor", "must be positive and finite");
  for (double u : run.u_grid)
    if (!(u > -1.0)) throw ConfigError("run.u_grid", "Laplace arguments must exceed -1");
  if (!(run.step > 0.0)) throw ConfigError("run.step", "must be positive");
  if (!(run.sub_delta >= 0.0)) throw ConfigError("run.sub_delta", "must be non-negative");
  if (run.horizon && !(*run.horizon > 0.0)) throw ConfigError("run.horizon", "must be positive");
  if (run.x0) {
    if (run.x0->size() != sys.n()) throw ConfigError("run.x0", "dimension must match the state dimension");
    if (!sys.domain.contains(*run.x0)) throw ConfigError("run.x0", "must lie inside the domain");
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    throw ConfigError("", path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like KEY=VALUE");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try { value = Json::parse(raw); } catch (const Json::parse_error&) { value = raw; }

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "malformed override key");
    if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

}  // namespace hte
