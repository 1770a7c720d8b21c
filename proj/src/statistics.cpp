#include "heavytail/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "heavytail/errors.hpp"

namespace hte {

SampleSummary summarize(std::span<const double> samples) {
  SampleSummary s;
  s.n = samples.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.stderr_ = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  s.ci_low = s.mean - 1.96 * s.stderr_;
  s.ci_high = s.mean + 1.96 * s.stderr_;
  return s;
}

LaplaceValue empirical_laplace(std::span<const double> taus, double lambda, double u) {
  if (!(u > -1.0)) throw DomainError("empirical_laplace: u must exceed -1");
  if (taus.empty()) throw UndefinedResult("empirical_laplace: no untruncated samples");
  if (!(lambda > 0.0)) throw DomainError("empirical_laplace: lambda must be positive");
  std::vector<double> values;
  values.reserve(taus.size());
  for (double t : taus) values.push_back(std::exp(-u * lambda * t));
  const SampleSummary s = summarize(values);
  return {s.mean, s.stderr_};
}

KsResult ks_exponential(std::span<const double> normalized) {
  if (normalized.size() < 100) throw PreconditionError("ks_exponential: at least 100 samples required");
  std::vector<double> x(normalized.begin(), normalized.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = x[i] > 0.0 ? -std::expm1(-x[i]) : 0.0;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.threshold = 1.36 / std::sqrt(n);
  r.pass = d < r.threshold;
  return r;
}

}  // namespace hte
