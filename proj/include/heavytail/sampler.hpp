#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "heavytail/levy_model.hpp"

namespace hte {

/// Parameters of the big/small jump split Z = L + eta at threshold eps^{-rho}.
struct SamplerConfig {
  double epsilon = 0.01;
  double rho = 0.5;
  double step = 1e-3;
  /// Cutoff below which compensated jumps are replaced by a Gaussian; <= 0 selects the default.
  double sub_delta = 0.0;

  /// eps^{-rho}; infinite when eps = 0 (no big jumps).
  double big_jump_threshold() const;
  /// Configured cutoff or max(1e-3, h^{1/alpha}) * c, clipped to the big-jump threshold.
  double resolved_sub_delta(const LevyModel& model) const;
  void validate(const LevyModel& model) const;
};

struct NoiseEvent {
  enum class Kind { segment, big_jump };
  Kind kind = Kind::segment;
  /// Clock time at the end of the segment, or the jump time.
  double t = 0.0;
  /// Segment length; zero for jumps.
  double dt = 0.0;
  /// Increment of L for segments, the jump J for big jumps.
  Vec value;
};

/// Exponential waiting time with rate beta.
double next_big_jump_time(double beta, Rng& rng);

/// Increment of the small-jump process L over dt.
///
/// Brownian part with covariance A dt, drift (mu + mu_eps) dt, compensated
/// compound Poisson jumps with sizes in [sub_delta, eps^{-rho}) sampled by
/// thinning the Pareto law above sub_delta, and a centred Gaussian proxy for
/// the compensated jumps below sub_delta.
Vec small_increment(const LevyModel& model, const SamplerConfig& cfg, double dt, Rng& rng);

/// Draws increments of L for a fixed (model, cfg); constants are precomputed.
class SmallJumpSampler {
 public:
  SmallJumpSampler(const LevyModel& model, const SamplerConfig& cfg);

  Vec draw(double dt, Rng& rng);

  double sub_delta() const { return sub_delta_; }
  /// Rate of jumps with sizes in [sub_delta, eps^{-rho}).
  double mid_rate() const { return mid_rate_; }
  /// Mid-range jumps embedded so far.
  long long mid_jump_count() const { return mid_jumps_; }
  /// Sizes of the embedded mid-range jumps are recorded when enabled.
  void record_jump_sizes(std::vector<double>* sink) { sizes_ = sink; }

 private:
  const LevyModel* model_;
  int m_;
  bool silent_;  // eps = 0: the noise is switched off entirely
  double step_;
  double threshold_;
  double sub_delta_;
  double raw_rate_;  // tail(sub_delta), before thinning
  double mid_rate_;
  Vec drift_;
  Mat brown_chol_;
  Mat proxy_chol_;
  bool has_brown_ = false;
  bool has_proxy_ = false;
  long long mid_jumps_ = 0;
  std::vector<double>* sizes_ = nullptr;
  std::poisson_distribution<long long> step_poisson_;
  std::normal_distribution<double> normal_;
};

/// Per-trial driving noise. Produces time-ordered events lazily: continuous
/// segments of length <= h, and big jumps at exact exponential times.
/// The sequence is a pure function of (model, cfg, horizon, rng seed).
class EventStream {
 public:
  EventStream(const LevyModel& model, const SamplerConfig& cfg, double horizon, Rng rng);

  /// Writes the next event; false once the horizon has been covered.
  bool next(NoiseEvent& event);

  double big_jump_rate() const { return beta_; }
  double threshold() const { return threshold_; }
  double horizon() const { return horizon_; }
  SmallJumpSampler& small_jumps() { return small_; }

 private:
  const LevyModel* model_;
  SamplerConfig cfg_;
  double horizon_;
  Rng rng_;
  double threshold_;
  double beta_;
  SmallJumpSampler small_;
  double t_ = 0.0;
  double next_jump_;
};

std::vector<NoiseEvent> generate_event_stream(const LevyModel& model, const SamplerConfig& cfg,
                                              double horizon, Rng rng);

/// CSV dump: columns t, kind, v1..vm.
void write_event_stream_csv(std::ostream& out, const std::vector<NoiseEvent>& events, int m);

}  // namespace hte
