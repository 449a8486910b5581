#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace flowlab {

// Counter-based generator: every draw is a pure function of (key, counter),
// so any sample in any stream can be produced independently and in parallel.

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rng_mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

// uniform in (0,1): top 53 bits plus a half-ulp offset, never 0 or 1
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
  double z0, z1;
};

// two independent standard normals from one (key, counter) cell via Box-Muller
inline NormalPair normal_pair(std::uint64_t key, std::uint64_t counter) {
  const double u1 = uniform01(rng_mix(key, 2 * counter));
  const double u2 = uniform01(rng_mix(key, 2 * counter + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

inline double normal_draw(std::uint64_t key, std::uint64_t counter) {
  return normal_pair(key, counter).z0;
}

} // namespace flowlab
