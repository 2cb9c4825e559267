#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include "radiomap/io.hpp"

using namespace radiomap;
using radiomap::testing::random_grid;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("radiomap_test_" + name);
}

}  // namespace

TEST_CASE("grid text round-trips bit for bit, NA cells included") {
  ScalarGrid g = random_grid(7, 5, 1, -120.0, 20.0);
  g.set(0, 0, 1e-300);
  g.set(1, 1, -0.0);
  g.clear(3, 2);
  g.clear(6, 4);
  const auto path = temp_file("grid.rmg");
  write_grid(g, path);
  const ScalarGrid back = read_grid(path);
  std::filesystem::remove(path);
  CHECK(back.units() == g.units());
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 5; ++c) {
      CHECK(back.defined(r, c) == g.defined(r, c));
      if (g.defined(r, c)) CHECK(radiomap::testing::same_bits(back.at(r, c), g.at(r, c)));
    }
}

TEST_CASE("1x1 grid and header layout") {
  ScalarGrid g(1, 1, Units::normalized, 0.5);
  CHECK(format_grid(g) == "RMG1 1 1 normalized\n0.5\n");
  CHECK(parse_grid(format_grid(g)) == g);
}

TEST_CASE("malformed grids are rejected") {
  CHECK_THROWS_AS(parse_grid("RMG2 1 1 dbm\n1\n"), Error);
  CHECK_THROWS_AS(parse_grid("RMG1 1 2 dbm\n1\n"), Error);
  CHECK_THROWS_AS(parse_grid("RMG1 1 1 dbm\nabc\n"), Error);
  CHECK_THROWS_AS(parse_grid("RMG1 1 1 dbm\ninf\n"), Error);
  CHECK_THROWS_AS(parse_grid("RMG1 1 1 dbm\n1\n2\n"), Error);
  CHECK_THROWS_AS(parse_grid("RMG1 2 1 dbm\n1\n"), Error);
  CHECK_THROWS_AS(read_grid(temp_file("does_not_exist")), Error);
}

TEST_CASE("masks round-trip") {
  std::mt19937_64 rng(3);
  RegionMask m(9, 11, true);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 11; ++c) m.set_observed(r, c, rng() % 2);
  const auto path = temp_file("mask.rmg");
  write_mask(m, path);
  CHECK(read_mask(path) == m);
  std::filesystem::remove(path);
  CHECK(parse_mask(format_mask(RegionMask(3, 3, true))) == RegionMask(3, 3, true));
  CHECK_THROWS_AS(parse_mask("RMG1 1 1 mask\n2\n"), Error);
  CHECK_THROWS_AS(parse_mask("RMG1 1 1 dbm\n1\n"), Error);
}

TEST_CASE("PGM golden bytes") {
  ScalarGrid g(2, 3, Units::dbm, 0.0);
  const double v[] = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  for (int i = 0; i < 6; ++i) g.set(i / 3, i % 3, v[i]);
  g.clear(1, 2);
  const std::string expect = std::string("P5\n3 2\n255\n") + std::string("\x00\x40\x80\xbf\xff\x00", 6);
  CHECK(encode_pgm(g) == expect);
}

TEST_CASE("PGM range handling") {
  const std::string gray = encode_pgm(ScalarGrid(2, 2, Units::dbm, 5.0), Range{0.0, 10.0});
  CHECK(gray.substr(gray.size() - 4) == std::string(4, static_cast<char>(128)));
  ScalarGrid g(1, 4, Units::dbm, 0.0);
  g.set(0, 1, -100.0);
  g.set(0, 2, 10.0);
  g.set(0, 3, 100.0);
  const std::string bytes = encode_pgm(g, Range{0.0, 10.0});
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 4]) == 0);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 3]) == 0);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 255);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 255);
  CHECK_THROWS_AS(encode_pgm(ScalarGrid(2, 2, Units::dbm, 5.0)), Error);
  CHECK_THROWS_AS(encode_pgm(g, Range{1.0, 1.0}), Error);
}

TEST_CASE("mse and ne") {
  const ScalarGrid t = random_grid(12, 12, 5, -80.0, -30.0);
  const RegionMask m = radiomap::testing::rect_mask(12, 12, 3, 3, 5, 6);
  CHECK(mse(t, t, m) == 0.0);
  CHECK(ne(t, t, m) == 0.0);
  ScalarGrid shifted = t;
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) shifted.set(r, c, t.at(r, c) + 1.5);
  CHECK(mse(t, shifted, m) == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(ne(t, ScalarGrid(12, 12, Units::dbm, 0.0), m) == doctest::Approx(1.0).epsilon(1e-15));

  const ScalarGrid e = random_grid(12, 12, 6, -80.0, -30.0);
  double se = 0.0, ss = 0.0;
  int n = 0;
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c)
      if (m.missing(r, c)) {
        se += (t.at(r, c) - e.at(r, c)) * (t.at(r, c) - e.at(r, c));
        ss += t.at(r, c) * t.at(r, c);
        ++n;
      }
  CHECK(std::abs(mse(t, e, m) - se / n) <= 1e-12 * (se / n));
  CHECK(mse(t, e, m) == mse(e, t, m));
  CHECK(std::abs(ne(t, e, m) - se / ss) <= 1e-12);

  ScalarGrid t3 = t, e3 = e;
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) {
      t3.set(r, c, 3.0 * t.at(r, c));
      e3.set(r, c, 3.0 * e.at(r, c));
    }
  CHECK(ne(t3, e3, m) == doctest::Approx(ne(t, e, m)).epsilon(1e-12));
  CHECK_THROWS_AS(mse(t, e, RegionMask(12, 12, true)), Error);
}

TEST_CASE("scene JSON round-trips") {
  Scene s(3, 4, 2.5);
  s.set_building(1, 2, true);
  s.transmitters.push_back({{1.25, 0.5}, 43.0, std::nullopt});
  s.transmitters.push_back({{3.0, 2.0}, 40.0, LdplParams{30.0, 25.0}});
  const Scene back = scene_from_json(scene_to_json(s));
  CHECK(back.rows == 3);
  CHECK(back.cols == 4);
  CHECK(back.cell_size_m == 2.5);
  CHECK(back.buildings == s.buildings);
  REQUIRE(back.transmitters.size() == 2);
  CHECK(back.transmitters[0].position.x == 1.25);
  CHECK_FALSE(back.transmitters[0].ldpl.has_value());
  CHECK(back.transmitters[1].ldpl->epsilon == 25.0);
  CHECK_THROWS_AS(scene_from_json("{}"), Error);
}
