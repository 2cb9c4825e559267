#pragma once

#include <bit>
#include <cstdint>
#include <random>

#include "radiomap/grid.hpp"

namespace radiomap::testing {

inline ScalarGrid random_grid(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ScalarGrid g(rows, cols, Units::dbm, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g.set(r, c, u(rng));
  return g;
}

inline RegionMask rect_mask(int rows, int cols, int r0, int c0, int h, int w) {
  RegionMask m(rows, cols, true);
  for (int r = r0; r < r0 + h; ++r)
    for (int c = c0; c < c0 + w; ++c) m.set_observed(r, c, false);
  return m;
}

// Copy of `g` with Omega cells cleared.
inline ScalarGrid masked(const ScalarGrid& g, const RegionMask& m) {
  ScalarGrid out = g;
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c)
      if (m.missing(r, c)) out.clear(r, c);
  return out;
}

inline bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace radiomap::testing
