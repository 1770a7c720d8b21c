#pragma once

#include <span>
#include <vector>

namespace hte {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (n - 1)
  double stderr_ = 0.0;
  double ci_low = 0.0;  ///< mean -/+ 1.96 stderr
  double ci_high = 0.0;
};

SampleSummary summarize(std::span<const double> samples);

struct LaplaceValue {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Mean of exp(-u lambda tau) and its standard error. u > -1.
LaplaceValue empirical_laplace(std::span<const double> taus, double lambda, double u);

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;  ///< 1.36 / sqrt(N), the 5% critical value
  bool pass = false;
};

/// One-sample Kolmogorov–Smirnov test of normalized samples against Exp(1).
/// Requires at least 100 samples.
KsResult ks_exponential(std::span<const double> normalized);

}  // namespace hte
