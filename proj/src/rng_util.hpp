#pragma once

#include <cstdint>
#include <random>

namespace tdann::detail {

// mt19937_64 output mapped by hand so draw sequences do not depend on the
// standard library's distribution implementations.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double radius) {
  return (2.0 * unit_double(rng) - 1.0) * radius;
}

// Box-Muller standard normal; consumes two draws per sample.
inline double gaussian(std::mt19937_64& rng) {
  double u1 = unit_double(rng);
  while (u1 <= 0.0) u1 = unit_double(rng);
  const double u2 = unit_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace tdann::detail
