#include "heavytail/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "heavytail/errors.hpp"

namespace hte {

double SamplerConfig::big_jump_threshold() const {
  if (epsilon == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(epsilon, -rho);
}

double SamplerConfig::resolved_sub_delta(const LevyModel& model) const {
  double delta = sub_delta;
  if (!(delta > 0.0)) {
    const double c = model.variant() == LevyVariant::compound_poisson_pareto ? 1.0 : model.scale();
    delta = std::max(1e-3, std::pow(step, 1.0 / model.alpha())) * c;
  }
  return std::min(delta, big_jump_threshold());
}

void SamplerConfig::validate(const LevyModel& model) const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw PreconditionError("sampler: epsilon must lie in [0, 1]");
  if (!(rho > 0.0 && rho < 1.0)) throw PreconditionError("sampler: rho must lie in (0, 1)");
  if (!(step > 0.0)) throw PreconditionError("sampler: step must be positive");
  if (sub_delta > big_jump_threshold()) throw PreconditionError("sampler: sub_delta must not exceed eps^{-rho}");
  (void)model;
}

double next_big_jump_time(double beta, Rng& rng) {
  if (!(beta > 0.0)) throw DomainError("next_big_jump_time: rate must be positive");
  return -std::log(uniform_open(rng)) / beta;
}

namespace {

Mat cholesky_or_zero(const Mat& cov, bool& nonzero) {
  nonzero = cov.norm() > 0.0;
  if (!nonzero) return Mat::Zero(cov.rows(), cov.cols());
  // LDLT tolerates semidefinite covariances.
  Eigen::LDLT<Mat> ldlt(cov);
  Mat L = ldlt.matrixL();
  Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Mat P = ldlt.transpositionsP().transpose() * Mat::Identity(cov.rows(), cov.cols());
  return P * L * d.asDiagonal();
}

}  // namespace

SmallJumpSampler::SmallJumpSampler(const LevyModel& model, const SamplerConfig& cfg)
    : model_(&model), m_(model.dimension()), silent_(cfg.epsilon == 0.0), step_(cfg.step) {
  cfg.validate(model);
  threshold_ = cfg.big_jump_threshold();
  sub_delta_ = cfg.resolved_sub_delta(model);
  drift_ = model.drift();
  brown_chol_ = cholesky_or_zero(model.brownian_cov(), has_brown_);
  if (model.has_jumps() && !silent_) {
    raw_rate_ = model.tail(sub_delta_);
    mid_rate_ = raw_rate_ - model.tail(threshold_);
    // mu + mu_eps, minus the compensator of the explicitly sampled jumps.
    const Vec mu_eps = threshold_ > 1.0 ? model.first_moment(1.0, threshold_) : Vec::Zero(m_);
    drift_ += mu_eps - model.first_moment(sub_delta_, threshold_);
    proxy_chol_ = cholesky_or_zero(model.gaussian_proxy_cov(sub_delta_), has_proxy_);
  } else {
    raw_rate_ = 0.0;
    mid_rate_ = 0.0;
    proxy_chol_ = Mat::Zero(m_, m_);
  }
  step_poisson_ = std::poisson_distribution<long long>(raw_rate_ * step_);
}

Vec SmallJumpSampler::draw(double dt, Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("small_increment: dt must be positive");
  Vec inc = Vec::Zero(m_);
  if (silent_) return inc;
  inc += drift_ * dt;
  if (has_brown_ || has_proxy_) {
    Vec g(m_);
    if (has_brown_) {
      for (int i = 0; i < m_; ++i) g(i) = normal_(rng);
      inc += std::sqrt(dt) * (brown_chol_ * g);
    }
    if (has_proxy_) {
      for (int i = 0; i < m_; ++i) g(i) = normal_(rng);
      inc += std::sqrt(dt) * (proxy_chol_ * g);
    }
  }
  if (raw_rate_ > 0.0) {
    long long count = 0;
    if (std::abs(dt - step_) <= 1e-9 * step_) {
      count = step_poisson_(rng);
    } else {
      std::poisson_distribution<long long> pois(raw_rate_ * dt);
      count = pois(rng);
    }
    if (m_ <= 2 && model_->symmetric()) {
      // Hot path: scalar accumulation for the common low-dimensional isotropic case.
      double s0 = 0.0, s1 = 0.0;
      for (long long k = 0; k < count; ++k) {
        const double r = model_->sample_radius(sub_delta_, rng);
        if (r >= threshold_) continue;
        if (m_ == 1) {
          s0 += (rng() >> 63) ? r : -r;
        } else {
          double cx, cy;
          unit_circle(rng, cx, cy);
          s0 += r * cx;
          s1 += r * cy;
        }
        ++mid_jumps_;
        if (sizes_) sizes_->push_back(r);
      }
      inc(0) += s0;
      if (m_ == 2) inc(1) += s1;
    } else {
      for (long long k = 0; k < count; ++k) {
        const double r = model_->sample_radius(sub_delta_, rng);
        // Thinning: jumps at or above the threshold belong to the big-jump process.
        if (r >= threshold_) continue;
        inc += r * model_->sample_direction(rng);
        ++mid_jumps_;
        if (sizes_) sizes_->push_back(r);
      }
    }
  }
  return inc;
}

Vec small_increment(const LevyModel& model, const SamplerConfig& cfg, double dt, Rng& rng) {
  SmallJumpSampler sampler(model, cfg);
  return sampler.draw(dt, rng);
}

EventStream::EventStream(const LevyModel& model, const SamplerConfig& cfg, double horizon, Rng rng)
    : model_(&model), cfg_(cfg), horizon_(horizon), rng_(std::move(rng)), small_(model, cfg) {
  if (!(horizon > 0.0)) throw PreconditionError("event stream: horizon must be positive");
  threshold_ = cfg.big_jump_threshold();
  beta_ = (model.has_jumps() && cfg.epsilon > 0.0) ? model.big_jump_rate(threshold_) : 0.0;
  next_jump_ = beta_ > 0.0 ? next_big_jump_time(beta_, rng_) : std::numeric_limits<double>::infinity();
}

bool EventStream::next(NoiseEvent& event) {
  if (t_ >= horizon_) return false;
  if (next_jump_ <= t_ && next_jump_ <= horizon_) {
    event.kind = NoiseEvent::Kind::big_jump;
    event.t = next_jump_;
    event.dt = 0.0;
    event.value = model_->sample_big_jump(threshold_, rng_);
    next_jump_ += next_big_jump_time(beta_, rng_);
    return true;
  }
  const double end = std::min({t_ + cfg_.step, next_jump_, horizon_});
  event.kind = NoiseEvent::Kind::segment;
  event.dt = end - t_;
  event.t = end;
  event.value = small_.draw(event.dt, rng_);
  t_ = end;
  return true;
}

std::vector<NoiseEvent> generate_event_stream(const LevyModel& model, const SamplerConfig& cfg,
                                              double horizon, Rng rng) {
  EventStream stream(model, cfg, horizon, std::move(rng));
  std::vector<NoiseEvent> events;
  NoiseEvent ev;
  while (stream.next(ev)) events.push_back(ev);
  return events;
}

void write_event_stream_csv(std::ostream& out, const std::vector<NoiseEvent>& events, int m) {
  out << "t,kind";
  for (int i = 1; i <= m; ++i) out << ",v" << i;
  out << '\n';
  char buf[64];
  for (const auto& ev : events) {
    std::snprintf(buf, sizeof buf, "%.17g", ev.t);
    out << buf << ',' << (ev.kind == NoiseEvent::Kind::segment ? "segment" : "big_jump");
    for (int i = 0; i < m; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", ev.value(i));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace hte
