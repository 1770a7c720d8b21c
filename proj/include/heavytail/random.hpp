#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hte {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent stream for one trial. Depends only on the triple,
/// so trials can be executed in any order on any number of workers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t trial) noexcept {
  return mix64(mix64(mix64(master) ^ (stream + 0x632be59bd9b4e019ULL)) ^
               (trial * 0xd1b54a32d192ed03ULL + 1));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t trial) {
  return Rng(derive_seed(master, stream, trial));
}

/// Uniform on [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = uniform01(rng);
    if (u > 0.0) return u;
  }
}

/// Uniform direction on the unit circle: rejection onto the disc using the two
/// 32-bit halves of a single draw.
inline void unit_circle(Rng& rng, double& x, double& y) {
  for (;;) {
    const std::uint64_t bits = rng();
    const double a = static_cast<double>(bits >> 32) * 0x1.0p-31 - 1.0;
    const double b = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-31 - 1.0;
    const double r2 = a * a + b * b;
    if (r2 > 1e-12 && r2 <= 1.0) {
      const double inv = 1.0 / std::sqrt(r2);
      x = a * inv;
      y = b * inv;
      return;
    }
  }
}

}  // namespace hte
