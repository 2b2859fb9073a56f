#pragma once

#include <climits>
#include <cstdint>
#include <random>
#include <string_view>

namespace pano_roi {

// std::mt19937_64 is fully specified; the distribution helpers below replace
// the implementation-defined std:: distributions so draws are identical
// across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-item seed from a master seed and an identifier (FNV-1a, then mixed).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view id) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(master ^ splitmix64(h));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi].
inline double uniform_real(Rng& rng, double lo, double hi) noexcept {
  const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740991.0);
  const double v = lo + u * (hi - lo);
  return v > hi ? hi : v;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace pano_roi
