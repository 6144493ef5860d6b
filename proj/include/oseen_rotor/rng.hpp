#pragma once

// Counter-based random numbers: the k-th draw of stream s under seed q is a
// pure function of (q, s, k), so parallel consumers stay reproducible.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "oseen_rotor/types.hpp"

namespace oseen_rotor {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

  std::uint64_t bits(std::uint64_t k) const { return splitmix64(key_ ^ splitmix64(k)); }

  /// Uniform in (0, 1).
  double uniform(std::uint64_t k) const {
    return (static_cast<double>(bits(k) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal from the draws 2k and 2k+1.
  double normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform on the unit sphere from the draws 2k and 2k+1.
  Vec3 unit_vector(std::uint64_t k) const {
    const double mu = 2.0 * uniform(2 * k) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform(2 * k + 1);
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    return {mu, s * std::cos(phi), s * std::sin(phi)};
  }

 private:
  std::uint64_t key_;
};

}  // namespace oseen_rotor
