#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <random>

#include "radiomap/propagation.hpp"

using namespace radiomap;

namespace {

// Fraction of `samples` midpoint samples of from->to that fall in each cell.
double supersampled_open_fraction(const Scene& s, Point from, Point to, int samples) {
  int open = 0;
  for (int k = 0; k < samples; ++k) {
    const double t = (k + 0.5) / samples;
    const double x = from.x + t * (to.x - from.x);
    const double y = from.y + t * (to.y - from.y);
    const int r = std::min(static_cast<int>(std::floor(y)), s.rows - 1);
    const int c = std::min(static_cast<int>(std::floor(x)), s.cols - 1);
    if (!s.is_building(r, c)) ++open;
  }
  return static_cast<double>(open) / samples;
}

Scene empty_scene(int rows, int cols, double cell = 1.0) { return Scene(rows, cols, cell); }

}  // namespace

TEST_CASE("horizontal ray across four cells") {
  const RayTraversal t = traverse(1, 4, {0.0, 0.5}, {4.0, 0.5});
  REQUIRE(t.segments.size() == 4);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(t.segments[i].cell == Cell{0, static_cast<int>(i)});
    sum += t.segments[i].length;
  }
  CHECK(sum == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("degenerate ray is a single zero-length cell") {
  const RayTraversal t = traverse(3, 3, {1.5, 1.5}, {1.5, 1.5});
  REQUIRE(t.segments.size() == 1);
  CHECK(t.segments[0].cell == Cell{1, 1});
  CHECK(t.segments[0].length == 0.0);
}

TEST_CASE("segment lengths sum to the Euclidean length on random rays") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const Point a{u(rng) * 40.0, u(rng) * 30.0};
    const Point b{u(rng) * 40.0, u(rng) * 30.0};
    const RayTraversal t = traverse(30, 40, a, b);
    double sum = 0.0;
    for (const auto& s : t.segments) {
      CHECK(s.length >= 0.0);
      sum += s.length;
    }
    CHECK(std::abs(sum - std::hypot(b.x - a.x, b.y - a.y)) <= 1e-9);
  }
}

TEST_CASE("per-cell lengths match a supersampled estimate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 100000;
  for (int k = 0; k < 20; ++k) {
    const Point a{u(rng) * 16.0, u(rng) * 16.0};
    const Point b{u(rng) * 16.0, u(rng) * 16.0};
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const RayTraversal t = traverse(16, 16, a, b);
    std::vector<double> hits(256, 0.0);
    for (int s = 0; s < samples; ++s) {
      const double f = (s + 0.5) / samples;
      const int r = std::min(static_cast<int>(std::floor(a.y + f * (b.y - a.y))), 15);
      const int c = std::min(static_cast<int>(std::floor(a.x + f * (b.x - a.x))), 15);
      hits[r * 16 + c] += len / samples;
    }
    for (const auto& seg : t.segments) CHECK(std::abs(seg.length - hits[seg.cell.row * 16 + seg.cell.col]) <= 2e-3);
  }
}

TEST_CASE("block term: clear path, fully blocked path and half slab") {
  Scene s = empty_scene(10, 10);
  s.transmitters.push_back({{0.5, 5.5}, 0.0, std::nullopt});
  CHECK(block_term(s, 0, {5, 9}) == 1.0);

  Scene all = empty_scene(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) all.set_building(r, c, true);
  all.transmitters.push_back({{0.5, 0.5}, 0.0, std::nullopt});
  CHECK(block_term(all, 0, {3, 3}) == 0.0);

  Scene slab = empty_scene(1, 10);
  for (int c = 5; c < 10; ++c) slab.set_building(0, c, true);
  const Point from{0.0, 0.5};
  const double b = block_term(slab, from, {0, 9});
  CHECK(std::abs(b - supersampled_open_fraction(slab, from, cell_center({0, 9}), 100000)) <= 2e-3);
  CHECK(b == doctest::Approx(5.0 / 9.5).epsilon(1e-12));
}

TEST_CASE("block term stays in [0,1] and is 1 iff no building is crossed") {
  std::mt19937_64 rng(9);
  Scene s = empty_scene(20, 20);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) s.set_building(r, c, rng() % 7 == 0);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int k = 0; k < 500; ++k) {
    const Point from{u(rng), u(rng)};
    const Cell p{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    const double b = block_term(s, from, p);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    bool crossed = false;
    for (const auto& seg : traverse(s, from, p).segments)
      if (seg.length > 0.0 && s.is_building(seg.cell.row, seg.cell.col)) crossed = true;
    CHECK((b == 1.0) == !crossed);
  }
}

TEST_CASE("radio factor examples") {
  Scene s = empty_scene(10, 10);
  s.transmitters.push_back({{0.5, 0.5}, 0.0, std::nullopt});
  // p one cell to the right: l = (1, 0).
  CHECK(radio_factor(s, 0, {0, 1}, {0.0, 1.0}, 1.0) == doctest::Approx(0.0));
  CHECK(radio_factor(s, 0, {0, 1}, {1.0, 0.0}, 1.0) == doctest::Approx(1.0));
  // d = 4, 60 degrees.
  const double ang = std::acos(0.5);
  CHECK(radio_factor(s, 0, {0, 4}, {std::cos(ang), std::sin(ang)}, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(radio_factor(s, 0, {0, 0}, {1.0, 0.0}, 1.0) == 0.0);
  CHECK_THROWS_AS(radio_factor(s, 0, {0, 1}, {0.0, 0.0}, 1.0), Error);
}

TEST_CASE("IDW depth map is monotone along a radial ray in an empty scene") {
  Scene s = empty_scene(32, 32);
  s.transmitters.push_back({{16.0, 16.0}, 30.0, std::nullopt});
  const DepthMap d = depth_map(s, {DepthModel::idw, 0.01});
  CHECK_FALSE(d.degenerate);
  for (int c = 17; c < 32; ++c) CHECK(d.values.at(16, c) <= d.values.at(16, c - 1));
  for (double v : d.values.raw()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("all-building scene gives a degenerate all-zero depth map") {
  Scene s = empty_scene(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) s.set_building(r, c, true);
  s.transmitters.push_back({{0.2, 0.2}, 30.0, std::nullopt});
  const DepthMap d = depth_map(s, {});
  CHECK(d.degenerate);
  for (double v : d.values.raw()) CHECK(v == 0.0);
}

TEST_CASE("depth map equals hand-composed E*B products") {
  Scene s(32, 32, 2.0);
  for (int r = 4; r < 28; ++r) s.set_building(r, 16, true);
  s.transmitters.push_back({{3.3, 15.2}, 40.0, std::nullopt});
  s.transmitters.push_back({{29.1, 7.7}, 37.0, std::nullopt});
  const double sigma = 0.3;
  const DepthMap d = depth_map(s, {DepthModel::idw, sigma}, nullptr, nullptr, Exec::serial);
  std::vector<double> raw(32 * 32);
  double lo = 1e300, hi = -1e300;
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) {
      double v = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        const auto& tx = s.transmitters[i];
        const double dx = (c + 0.5 - tx.position.x) * 2.0;
        const double dy = (r + 0.5 - tx.position.y) * 2.0;
        const double dist = std::max(std::hypot(dx, dy), 1.0);
        v += std::pow(10.0, (tx.power_dbm - 40.0) / 10.0) * std::pow(dist, -sigma) * block_term(s, i, {r, c});
      }
      raw[r * 32 + c] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) CHECK(std::abs(d.values.at(r, c) - (raw[r * 32 + c] - lo) / (hi - lo)) <= 1e-9);
}

TEST_CASE("adding a building never increases a transmitter's contribution") {
  Scene s = empty_scene(20, 20);
  s.transmitters.push_back({{2.5, 2.5}, 30.0, std::nullopt});
  const ScalarGrid before = depth_field(s, {}, nullptr, nullptr);
  s.set_building(8, 8, true);
  const ScalarGrid after = depth_field(s, {}, nullptr, nullptr);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) CHECK(after.at(r, c) <= before.at(r, c));
}

namespace {

ScalarGrid ldpl_field(const Scene& s, double theta, double eps) {
  ScalarGrid g(s.rows, s.cols);
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) g.set(r, c, theta - eps * std::log10(tx_distance_m(s, 0, {r, c})));
  return g;
}

}  // namespace

TEST_CASE("LDPL fit recovers an exact model") {
  Scene s(24, 24, 1.5);
  s.transmitters.push_back({{7.3, 9.1}, 30.0, std::nullopt});
  const ScalarGrid g = ldpl_field(s, 40.0, 20.0);
  RegionMask m(24, 24, true);
  const LdplFit fit = ldpl_fit(g, m, s, 0);
  CHECK(std::abs(fit.theta - 40.0) <= 1e-9);
  CHECK(std::abs(fit.epsilon - 20.0) <= 1e-9);
  CHECK(fit.rmse <= 1e-9);

  // Outlier excluded from Phi: exact recovery.
  ScalarGrid noisy = g;
  noisy.set(3, 3, 999.0);
  m.set_observed(3, 3, false);
  const LdplFit fit2 = ldpl_fit(noisy, m, s, 0);
  CHECK(std::abs(fit2.theta - 40.0) <= 1e-9);
  CHECK(std::abs(fit2.epsilon - 20.0) <= 1e-9);

  // Constant shift moves theta only.
  ScalarGrid shifted = g;
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c) shifted.set(r, c, g.at(r, c) + 7.25);
  const LdplFit fit3 = ldpl_fit(shifted, RegionMask(24, 24, true), s, 0);
  CHECK(std::abs(fit3.theta - (fit.theta + 7.25)) <= 1e-9);
  CHECK(std::abs(fit3.epsilon - fit.epsilon) <= 1e-9);
}

TEST_CASE("LDPL fit needs two distinct distances") {
  Scene s(3, 3, 1.0);
  s.transmitters.push_back({{1.5, 1.5}, 30.0, std::nullopt});
  RegionMask m(3, 3, false);
  m.set_observed(0, 1, true);
  m.set_observed(1, 0, true);
  CHECK_THROWS_AS(ldpl_fit(ScalarGrid(3, 3, Units::dbm, 1.0), m, s, 0), Error);
}

TEST_CASE("joint LDPL fit reproduces planted coefficients") {
  Scene s(30, 30, 2.0);
  s.transmitters.push_back({{4.2, 5.1}, 30.0, std::nullopt});
  s.transmitters.push_back({{25.5, 22.7}, 30.0, std::nullopt});
  s.transmitters.push_back({{14.0, 27.3}, 30.0, std::nullopt});
  const double theta = 12.0;
  const std::vector<double> eps{18.0, 25.0, 9.5};
  ScalarGrid g(30, 30);
  for (int r = 0; r < 30; ++r)
    for (int c = 0; c < 30; ++c) {
      double v = theta;
      for (std::size_t i = 0; i < 3; ++i) v -= eps[i] * std::log10(tx_distance_m(s, i, {r, c}));
      g.set(r, c, v);
    }
  const JointLdplFit fit = ldpl_fit_joint(g, radiomap::testing::rect_mask(30, 30, 10, 10, 8, 8), s);
  CHECK(std::abs(fit.theta - theta) <= 1e-6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(fit.epsilon[i] - eps[i]) <= 1e-6);
  CHECK(std::abs(ldpl_predict(fit, s, {12, 12}) - g.at(12, 12)) <= 1e-6);
}

TEST_CASE("LDPL depth field on an open scene equals the fitted model") {
  Scene s(20, 20, 1.0);
  s.transmitters.push_back({{3.5, 3.5}, 30.0, std::nullopt});
  const ScalarGrid g = ldpl_field(s, 40.0, 20.0);
  const RegionMask m(20, 20, true);
  const ScalarGrid f = depth_field(s, {DepthModel::ldpl, 0.01}, &g, &m);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) CHECK(std::abs(f.at(r, c) - g.at(r, c)) <= 1e-9);
  CHECK_THROWS_AS(depth_field(s, {DepthModel::ldpl, 0.01}, nullptr, nullptr), Error);
  s.transmitters[0].ldpl = LdplParams{40.0, 20.0};
  const ScalarGrid preset = depth_field(s, {DepthModel::ldpl, 0.01}, nullptr, nullptr);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) CHECK(std::abs(preset.at(r, c) - f.at(r, c)) <= 1e-9);
}
