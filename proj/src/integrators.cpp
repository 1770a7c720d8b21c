#include "heavytail/integrators.hpp"

#include <cmath>

#include "heavytail/errors.hpp"
#include "heavytail/ode.hpp"

namespace hte {

Scheme Scheme::parse(const std::string& s) {
  if (s == "ito") return ito();
  if (s == "stratonovich") return stratonovich();
  if (s == "marcus") return marcus();
  const std::string prefix = "wong_zakai:";
  if (s.rfind(prefix, 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(s.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ConfigError("run.scheme", "bad subdivision count in '" + s + "'");
    }
    if (n < 1) throw ConfigError("run.scheme", "wong_zakai needs n >= 1");
    return wong_zakai(n);
  }
  throw ConfigError("run.scheme", "unknown scheme '" + s + "'");
}

std::string Scheme::name() const {
  switch (kind) {
    case Kind::ito: return "ito";
    case Kind::stratonovich: return "stratonovich";
    case Kind::marcus: return "marcus";
    case Kind::wong_zakai: return "wong_zakai:" + std::to_string(subdivisions);
  }
  return "unknown";
}

namespace {

int substep_count(const Vec& grad, double dt, double cap) {
  const double load = grad.norm() * dt;
  if (!(load > cap)) return 1;
  return static_cast<int>(std::ceil(load / cap));
}

// Time-1 flow of y' = F(y) w by classical RK4, split so that each piece moves
// the state by at most 0.1. Error is fifth order in |w|.
Vec small_flow(const NoiseField& field, const Vec& x, const Vec& w) {
  const double reach = (field.value(x) * w).norm();
  const int pieces = reach > 0.1 ? static_cast<int>(std::ceil(reach / 0.1)) : 1;
  const Vec v = w / static_cast<double>(pieces);
  Vec y = x;
  for (int i = 0; i < pieces; ++i) {
    const Vec k1 = field.value(y) * v;
    const Vec k2 = field.value(y + 0.5 * k1) * v;
    const Vec k3 = field.value(y + 0.5 * k2) * v;
    const Vec k4 = field.value(y + k3) * v;
    y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  return y;
}

// Single step without substepping. Ito and Stratonovich apply the noise
// linearly; Marcus flows along F for every increment, which reproduces the
// Stratonovich correction for the continuous part and the Marcus rule for the
// compensated jumps inside the segment.
Vec euler_step(Scheme::Kind kind, const Vec& x, const Vec& grad, double dt, const Vec& dL,
               const System& system, const Mat& A, double eps) {
  Vec out = x - grad * dt;
  if (eps == 0.0) return out;
  if (kind == Scheme::Kind::marcus && !system.field.is_constant()) {
    out += small_flow(system.field, x, eps * dL) - x;
    return out;
  }
  out.noalias() += eps * (system.field.value(x) * dL);
  if (kind == Scheme::Kind::stratonovich) out += (0.5 * eps * eps * dt) * system.field.stratonovich_term(x, A);
  return out;
}

}  // namespace

Vec segment_step(const Scheme& scheme, const Vec& x, double dt, const Vec& dL,
                 const System& system, const Mat& brownian_cov, const StepConfig& cfg) {
  if (!(dt > 0.0)) throw DomainError("segment_step: dt must be positive");
  Vec grad = system.potential.gradient(x);
  const int k = substep_count(grad, dt, cfg.step_cap);
  const double h = dt / k;
  const Vec dl = dL / static_cast<double>(k);
  Vec cur = x;
  for (int i = 0; i < k; ++i) {
    if (i > 0) grad = system.potential.gradient(cur);
    cur = euler_step(scheme.kind, cur, grad, h, dl, system, brownian_cov, cfg.epsilon);
  }
  if (!cur.allFinite()) throw NumericalFailure("segment_step: non-finite state");
  return cur;
}

Vec apply_big_jump(const Scheme& scheme, const Vec& x, const Vec& epsJ, const System& system,
                   const StepConfig& cfg) {
  if (epsJ.isZero(0.0)) return x;
  if (scheme.kind != Scheme::Kind::marcus) {
    Vec out = x + system.field.value(x) * epsJ;
    if (!out.allFinite()) throw NumericalFailure("apply_big_jump: non-finite state");
    return out;
  }
  try {
    return flow_phi(system.field, epsJ, x, cfg.flow_tol);
  } catch (const IntegrationFailure& fail) {
    for (const Vec& y : fail.partial_trajectory())
      if (!system.domain.contains(y)) return y;
    throw NumericalFailure(std::string("apply_big_jump: Marcus flow failed inside G: ") + fail.what());
  }
}

ExitRecord simulate_until_exit(const Scheme& scheme, const System& system, const LevyModel& model,
                               const SamplerConfig& sampler, const StepConfig& cfg, const Vec& x0,
                               double horizon, Rng rng, TrialDiagnostics* diag) {
  EventStream stream(model, sampler, horizon, std::move(rng));
  return simulate_until_exit(scheme, system, model, stream, cfg, x0, diag);
}

ExitRecord simulate_until_exit(const Scheme& scheme, const System& system, const LevyModel& model,
                               EventStream& stream, const StepConfig& cfg, const Vec& x0,
                               TrialDiagnostics* diag) {
  if (!system.domain.contains(x0)) throw PreconditionError("simulate_until_exit: x0 must lie in G");
  if (scheme.kind == Scheme::Kind::wong_zakai)
    throw PreconditionError("simulate_until_exit: wong_zakai is a validation path, not an exit scheme");

  const Mat& A = model.brownian_cov();
  const Domain& G = system.domain;
  ExitRecord rec;
  Vec x = x0;
  double t = 0.0;
  double last_jump = 0.0;
  NoiseEvent ev;
  if (diag && diag->record_path) diag->path.push_back({0.0, x});

  try {
    while (stream.next(ev)) {
      if (ev.kind == NoiseEvent::Kind::big_jump) {
        ++rec.n_big_jumps;
        if (diag) diag->pre_jump.emplace_back(ev.t - last_jump, x.norm());
        last_jump = ev.t;
        x = apply_big_jump(scheme, x, cfg.epsilon * ev.value, system, cfg);
        t = ev.t;
        if (diag && diag->record_path) diag->path.push_back({t, x});
        if (!G.contains(x)) {
          rec.tau = t;
          rec.exit_position = x;
          rec.exited_at_big_jump = true;
          return rec;
        }
        continue;
      }

      const double t0 = ev.t - ev.dt;
      Vec grad = system.potential.gradient(x);
      const int k = substep_count(grad, ev.dt, cfg.step_cap);
      const double h = ev.dt / k;
      const Vec dl = ev.value / static_cast<double>(k);
      for (int i = 0; i < k; ++i) {
        if (i > 0) grad = system.potential.gradient(x);
        Vec next = euler_step(scheme.kind, x, grad, h, dl, system, A, cfg.epsilon);
        if (!next.allFinite()) throw NumericalFailure("segment_step: non-finite state");
        if (!G.contains(next)) {
          // Bisect along the substep's chord for the crossing time.
          double lo = 0.0, hi = 1.0;
          while ((hi - lo) * h > cfg.exit_time_tol) {
            const double mid = 0.5 * (lo + hi);
            (G.contains(x + mid * (next - x)) ? lo : hi) = mid;
          }
          rec.tau = t0 + (i + hi) * h;
          rec.exit_position = x + hi * (next - x);
          return rec;
        }
        x = next;
      }
      t = ev.t;
      if (diag && diag->record_path) diag->path.push_back({t, x});
    }
  } catch (const NumericalFailure& e) {
    rec.failed = true;
    rec.failure = e.what();
    rec.tau = t;
    rec.exit_position = x;
    return rec;
  }
  rec.truncated = true;
  rec.tau = stream.horizon();
  rec.exit_position = x;
  return rec;
}

GridPath sample_brownian_path(const Mat& A, double duration, double dt, Rng& rng) {
  if (!(duration > 0.0) || !(dt > 0.0)) throw DomainError("sample_brownian_path: duration and dt must be positive");
  const int m = static_cast<int>(A.rows());
  const auto steps = static_cast<long long>(std::llround(duration / dt));
  Eigen::LDLT<Mat> ldlt(A);
  const Mat P = ldlt.transpositionsP().transpose() * Mat::Identity(m, m);
  const Mat L = P * Mat(ldlt.matrixL()) * ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::normal_distribution<double> normal;
  GridPath path;
  path.dt = dt;
  path.values.reserve(static_cast<std::size_t>(steps + 1));
  Vec z = Vec::Zero(m);
  path.values.push_back(z);
  Vec g(m);
  for (long long k = 0; k < steps; ++k) {
    for (int i = 0; i < m; ++i) g(i) = normal(rng);
    z += std::sqrt(dt) * (L * g);
    path.values.push_back(z);
  }
  return path;
}

Vec wong_zakai_path(const System& system, const GridPath& path, int n, double eps, const Vec& x0,
                    double tol) {
  if (n < 1) throw PreconditionError("wong_zakai_path: n must be >= 1");
  if (path.values.size() < 2) throw PreconditionError("wong_zakai_path: path needs at least two points");
  const double piece = 1.0 / n;
  const auto stride = static_cast<std::size_t>(std::llround(piece / path.dt));
  if (stride < 1 || std::abs(static_cast<double>(stride) * path.dt - piece) > 1e-9 * piece)
    throw PreconditionError("wong_zakai_path: 1/n must be a multiple of the path's grid step");
  const std::size_t last = path.values.size() - 1;
  if (last % stride != 0) throw PreconditionError("wong_zakai_path: path duration must be a multiple of 1/n");

  OdeOptions opt;
  opt.tol = tol;
  Vec x = x0;
  for (std::size_t k = 0; k < last; k += stride) {
    const Vec slope = (path.values[k + stride] - path.values[k]) / piece;
    auto rhs = [&](double, const Vec& y) -> Vec {
      return -system.potential.gradient(y) + eps * (system.field.value(y) * slope);
    };
    x = integrate_adaptive(rhs, x, 0.0, piece, opt).y;
  }
  return x;
}

Vec integrate_on_path(const Scheme& scheme, const System& system, const Mat& brownian_cov,
                      const GridPath& path, double eps, const Vec& x0, double step_cap) {
  StepConfig cfg;
  cfg.epsilon = eps;
  cfg.step_cap = step_cap;
  Vec x = x0;
  for (std::size_t k = 1; k < path.values.size(); ++k)
    x = segment_step(scheme, x, path.dt, path.values[k] - path.values[k - 1], system, brownian_cov, cfg);
  return x;
}

}  // namespace hte
