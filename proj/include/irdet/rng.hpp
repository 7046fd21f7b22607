#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace irdet {

// All randomness in the library flows through std::mt19937_64 plus the
// transforms below, so a given seed reproduces bit-identical output on any
// platform with the same libm.

/// Uniform draw in the open interval (0, 1).
inline double unit_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal draw via Box-Muller (no state beyond the engine).
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Decorrelated per-stream seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace irdet
