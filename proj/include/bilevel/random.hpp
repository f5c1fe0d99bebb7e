#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bilevel/types.hpp"

namespace bilevel {

// mt19937_64 is fully specified by the standard; the helpers below avoid the
// implementation-defined std:: distributions so seeded runs reproduce across
// standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vec uniform_in_box(Rng& rng, const Vec& lower, const Vec& upper) {
  Vec y(lower.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = uniform(rng, lower(i), upper(i));
  return y;
}

/// Flat Dirichlet weights of length k.
inline Vec dirichlet_weights(Rng& rng, Eigen::Index k) {
  Vec w(k);
  for (Eigen::Index i = 0; i < k; ++i) w(i) = -std::log(1.0 - uniform01(rng));
  return w / w.sum();
}

/// Radical inverse of `index` in base `base`; the Halton sequence coordinate.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace bilevel
