#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace radiomap;
using radiomap::testing::random_grid;
using radiomap::testing::rect_mask;

TEST_CASE("scalar grid stores values and rejects undefined reads") {
  ScalarGrid g(2, 3, Units::dbm, 1.5);
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 3);
  CHECK(g.at(1, 2) == 1.5);
  g.clear(1, 2);
  CHECK_FALSE(g.defined(1, 2));
  CHECK_THROWS_AS(g.at(1, 2), Error);
  CHECK_THROWS_AS(g.at(2, 0), Error);
  CHECK_THROWS_AS(g.set(0, 0, std::nan("")), Error);
  CHECK_THROWS_AS(g.set(0, 0, INFINITY), Error);
  CHECK(g.count_defined() == 5);
}

TEST_CASE("units round-trip through their names") {
  for (Units u : {Units::dbm, Units::normalized, Units::unitless}) CHECK(units_from_string(to_string(u)) == u);
  CHECK_THROWS_AS(units_from_string("watts"), Error);
}

TEST_CASE("boundary of a full mask is empty") { CHECK(boundary(RegionMask(6, 6, true)).empty()); }

TEST_CASE("boundary of a single missing centre cell") {
  RegionMask m(5, 5, true);
  m.set_observed(2, 2, false);
  const auto b = boundary(m);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == Cell{2, 2});
}

TEST_CASE("boundary of a centred 4x4 hole is its 12 perimeter cells") {
  const RegionMask m = rect_mask(8, 8, 2, 2, 4, 4);
  const auto b = boundary(m);
  CHECK(b.size() == 12);
  for (const Cell& p : b) {
    CHECK((p.row == 2 || p.row == 5 || p.col == 2 || p.col == 5));
  }
  CHECK(std::is_sorted(b.begin(), b.end()));
}

TEST_CASE("boundary matches a brute-force neighbour scan on random masks") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    RegionMask m(12, 9, true);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 9; ++c) m.set_observed(r, c, (rng() % 3) != 0);
    std::vector<Cell> expect;
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 9; ++c) {
        if (m.observed(r, c)) continue;
        bool touch = false;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const Cell q{r + dr, c + dc};
            if ((dr || dc) && m.contains(q) && m.observed(q)) touch = true;
          }
        if (touch) expect.push_back({r, c});
      }
    CHECK(boundary(m) == expect);
  }
}

TEST_CASE("extract_patch clips at corners and rejects bad sizes") {
  const ScalarGrid g = random_grid(6, 6, 1);
  const RegionMask m(6, 6, true);
  const Patch corner = extract_patch(g, m, {0, 0}, 3);
  CHECK(corner.valid_count() == 4);
  CHECK(corner.observed_count() == 4);
  const Patch inner = extract_patch(g, m, {3, 3}, 5);
  CHECK(inner.observed_count() == 25);
  CHECK(inner.values[0] == g.at(1, 1));
  CHECK_THROWS_AS(extract_patch(g, m, {3, 3}, 4), Error);
  CHECK_THROWS_AS(extract_patch(g, m, {3, 3}, 1), Error);
}

TEST_CASE("extract_patch observed count equals brute-force count") {
  std::mt19937_64 rng(11);
  const ScalarGrid g = random_grid(20, 17, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    RegionMask m(20, 17, true);
    const int r0 = static_cast<int>(rng() % 15);
    const int c0 = static_cast<int>(rng() % 12);
    for (int r = r0; r < r0 + 5; ++r)
      for (int c = c0; c < c0 + 5; ++c) m.set_observed(r, c, false);
    const Cell center{static_cast<int>(rng() % 20), static_cast<int>(rng() % 17)};
    const int n = 3 + 2 * static_cast<int>(rng() % 4);
    int count = 0;
    for (int r = center.row - n / 2; r <= center.row + n / 2; ++r)
      for (int c = center.col - n / 2; c <= center.col + n / 2; ++c)
        if (m.contains({r, c}) && m.observed(r, c)) ++count;
    const Patch p = extract_patch(radiomap::testing::masked(g, m), m, center, n);
    CHECK(p.observed_count() == count);
  }
}

TEST_CASE("normalize maps 0..10 to 0..1") {
  ScalarGrid g(1, 11);
  for (int c = 0; c <= 10; ++c) g.set(0, c, c);
  const Normalized n = normalize(g, RegionMask(1, 11, true));
  CHECK(n.params.min == 0.0);
  CHECK(n.params.span == 10.0);
  for (int c = 0; c <= 10; ++c) CHECK(n.grid.at(0, c) == doctest::Approx(c / 10.0).epsilon(1e-15));
  CHECK(n.grid.units() == Units::normalized);
}

TEST_CASE("normalize ignores Omega and round-trips within 1e-12") {
  ScalarGrid g = random_grid(8, 8, 3, -90.0, -20.0);
  const RegionMask m = rect_mask(8, 8, 2, 2, 3, 3);
  g.set(3, 3, 1000.0);  // placeholder in Omega
  double lo = 1e300, hi = -1e300;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      if (m.observed(r, c)) {
        lo = std::min(lo, g.at(r, c));
        hi = std::max(hi, g.at(r, c));
      }
  const Normalized n = normalize(g, m);
  CHECK(n.params.min == lo);
  CHECK(n.params.span == hi - lo);
  const ScalarGrid back = denormalize(n.grid, n.params);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      if (m.observed(r, c)) CHECK(std::abs(back.at(r, c) - g.at(r, c)) <= 1e-12 * std::abs(g.at(r, c)));
}

TEST_CASE("normalize rejects a constant observed region") {
  CHECK_THROWS_AS(normalize(ScalarGrid(4, 4, Units::dbm, 3.0), RegionMask(4, 4, true)), Error);
}

TEST_CASE("scene validation") {
  Scene s(4, 4, 2.0);
  s.transmitters.push_back({{2.0, 2.0}, 30.0, std::nullopt});
  CHECK_NOTHROW(s.validate());
  s.transmitters.push_back({{5.0, 1.0}, 30.0, std::nullopt});
  CHECK_THROWS_AS(s.validate(), Error);
  s.set_building(1, 2, true);
  CHECK(s.landscape().at(1, 2) == 1.0);
}
