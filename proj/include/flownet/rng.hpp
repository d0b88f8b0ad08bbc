#pragma once

#include <cstdint>
#include <random>

// Seeded draws with a fixed bit-level mapping from engine output to doubles.
// std::uniform_real_distribution is implementation-defined, so reports built
// from it would not be reproducible across standard libraries; these helpers
// consume exactly one mt19937_64 word per double.

namespace flownet {

using Rng = std::mt19937_64;

inline double uniform01(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny relative to 2^64, and exact
  // uniformity of index picks is not load-bearing, only determinism is.
  return g() % n;
}

}  // namespace flownet
