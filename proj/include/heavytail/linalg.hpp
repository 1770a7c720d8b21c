#pragma once

#include <Eigen/Dense>

namespace hte {

/// Upper bound on state and noise dimensions. Vectors and matrices keep their
/// storage inline so the per-step arithmetic never touches the heap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Vec zeros(int n) { return Vec::Zero(n); }

inline Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace hte
