#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "radiomap/baselines.hpp"
#include "radiomap/io.hpp"
#include "radiomap/propagation.hpp"

using namespace radiomap;
using radiomap::testing::masked;
using radiomap::testing::random_grid;
using radiomap::testing::rect_mask;

TEST_CASE("mean fill examples") {
  const RegionMask m = rect_mask(8, 8, 2, 2, 3, 3);
  const ScalarGrid flat(8, 8, Units::dbm, -60.0);
  CHECK(mse(flat, mean_fill(masked(flat, m), m), m) == 0.0);

  ScalarGrid two(2, 4, Units::dbm, 0.0);
  two.set(0, 0, 10.0);  // three zeros and one ten observed
  RegionMask mm(2, 4, true);
  for (int c = 0; c < 4; ++c) mm.set_observed(1, c, false);
  CHECK(mean_fill(masked(two, mm), mm).at(1, 2) == 2.5);

  const ScalarGrid g = random_grid(20, 20, 1, -90, -20);
  const RegionMask h = rect_mask(20, 20, 4, 5, 7, 6);
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c)
      if (h.observed(r, c)) {
        sum += g.at(r, c);
        ++n;
      }
  const ScalarGrid out = mean_fill(masked(g, h), h);
  CHECK(std::abs(out.at(6, 7) - sum / n) <= 1e-12);
}

TEST_CASE("IDW returns observed values exactly and averages symmetric neighbours") {
  const ScalarGrid g = random_grid(10, 10, 2);
  const RegionMask m = rect_mask(10, 10, 3, 3, 3, 3);
  const ScalarGrid out = idw_interp(masked(g, m), m);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c)
      if (m.observed(r, c)) CHECK(out.at(r, c) == g.at(r, c));

  ScalarGrid line(1, 3, Units::dbm, 0.0);
  line.set(0, 2, 10.0);
  RegionMask lm(1, 3, true);
  lm.set_observed(0, 1, false);
  CHECK(idw_interp(masked(line, lm), lm).at(0, 1) == 5.0);
}

TEST_CASE("IDW matches the Shepard full sum and a sorted k-nearest oracle") {
  const ScalarGrid g = random_grid(16, 16, 3, -80, -40);
  const RegionMask m = rect_mask(16, 16, 4, 6, 6, 5);
  const ScalarGrid obs = masked(g, m);
  for (int k : {0, 8}) {
    IdwParams p;
    p.power = 2.0;
    p.neighbors = k;
    const ScalarGrid out = idw_interp(obs, m, p, Exec::serial);
    CHECK(idw_interp(obs, m, p, Exec::parallel) == out);
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) {
        if (m.observed(r, c)) continue;
        // (distance^2, row-major index): equal distances keep scan order.
        std::vector<std::pair<double, int>> d;
        for (int rr = 0; rr < 16; ++rr)
          for (int cc = 0; cc < 16; ++cc)
            if (m.observed(rr, cc)) d.push_back({double(rr - r) * (rr - r) + double(cc - c) * (cc - c), rr * 16 + cc});
        std::sort(d.begin(), d.end());
        if (k > 0) d.resize(static_cast<std::size_t>(k));
        double num = 0.0, den = 0.0;
        for (auto [d2, idx] : d) {
          const double v = g.at(idx / 16, idx % 16);
          num += v / d2;
          den += 1.0 / d2;
        }
        CHECK(std::abs(out.at(r, c) - num / den) <= 1e-9);
      }
  }
}

TEST_CASE("thin-plate RBF with a linear tail reproduces a linear field") {
  ScalarGrid g(24, 24);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c) g.set(r, c, -50.0 + 0.3 * c - 0.7 * r);
  const RegionMask m = rect_mask(24, 24, 6, 8, 10, 9);
  RbfParams p;
  p.centers_cap = 200;
  const ScalarGrid out = rbf_interp(masked(g, m), m, p);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c) CHECK(std::abs(out.at(r, c) - g.at(r, c)) <= 1e-6);
  CHECK(rbf_interp(masked(g, m), m, p, Exec::serial) == out);
}

TEST_CASE("Gaussian RBF far from the data follows the linear tail") {
  const ScalarGrid g = random_grid(60, 60, 4);
  RegionMask m(60, 60, false);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) m.set_observed(r, c, true);
  RbfParams p;
  p.kernel = RbfKernel::gaussian;
  p.scale = 2.0;
  p.ridge = 1e-6;
  const ScalarGrid out = rbf_interp(masked(g, m), m, p);
  // Second differences vanish where only the affine tail contributes.
  CHECK(std::abs(out.at(59, 29) - 2.0 * out.at(59, 44) + out.at(59, 59)) <= 1e-6);
  CHECK(std::abs(out.at(29, 59) - 2.0 * out.at(44, 59) + out.at(59, 59)) <= 1e-6);
}

TEST_CASE("RBF centre subsampling is seeded") {
  const ScalarGrid g = random_grid(30, 30, 5);
  const RegionMask m = rect_mask(30, 30, 10, 10, 8, 8);
  RbfParams p;
  p.centers_cap = 150;
  CHECK(rbf_interp(masked(g, m), m, p) == rbf_interp(masked(g, m), m, p));
  RbfParams q = p;
  q.seed = 2;
  CHECK_FALSE(rbf_interp(masked(g, m), m, p) == rbf_interp(masked(g, m), m, q));
}

namespace {

Scene single_tx_scene(int rows, int cols) {
  Scene s(rows, cols, 2.0);
  s.transmitters.push_back({{9.3, 12.8}, 46.0, std::nullopt});
  return s;
}

}  // namespace

TEST_CASE("MBI is exact on a noiseless single-transmitter log-distance field") {
  const Scene s = single_tx_scene(40, 40);
  ScalarGrid g(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c) g.set(r, c, 10.0 - 31.0 * std::log10(tx_distance_m(s, 0, {r, c})));
  const RegionMask m = rect_mask(40, 40, 15, 15, 12, 12);
  CHECK(mse(g, mbi(masked(g, m), m, s), m) < 1e-10);

  // Constant field: flat fit.
  const ScalarGrid flat(40, 40, Units::dbm, -70.0);
  const ScalarGrid out = mbi(masked(flat, m), m, s);
  CHECK(std::abs(out.at(20, 20) + 70.0) <= 1e-9);

  // Buildings shadow part of the field: the model no longer fits.
  ScalarGrid shadowed = g;
  for (int r = 15; r < 27; ++r)
    for (int c = 20; c < 27; ++c) shadowed.set(r, c, g.at(r, c) - 15.0);
  for (int r = 0; r < 15; ++r)
    for (int c = 30; c < 40; ++c) shadowed.set(r, c, g.at(r, c) - 15.0);
  CHECK(mse(shadowed, mbi(masked(shadowed, m), m, s), m) > 0.0);
}
