#include "doctest.h"
#include "support.hpp"

#include <queue>
#include <random>
#include <set>

#include "radiomap/superpixel.hpp"

using namespace radiomap;

namespace {

// Number of 4-connected components of each label; all must be 1.
bool every_label_connected(const SuperpixelLabeling& l) {
  std::vector<int> seen(l.labels.size(), 0);
  std::vector<int> components(static_cast<std::size_t>(l.count), 0);
  for (int start = 0; start < l.rows * l.cols; ++start) {
    if (seen[start]) continue;
    const int label = l.labels[start];
    ++components[label];
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int i = q.front();
      q.pop();
      const int r = i / l.cols, c = i % l.cols;
      const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[0] >= l.rows || n[1] < 0 || n[1] >= l.cols) continue;
        const int j = n[0] * l.cols + n[1];
        if (!seen[j] && l.labels[j] == label) {
          seen[j] = 1;
          q.push(j);
        }
      }
    }
  }
  for (int k : components)
    if (k != 1) return false;
  return true;
}

ScalarGrid two_region(int n) {
  ScalarGrid g(n, n, Units::unitless, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = n / 2; c < n; ++c) g.set(r, c, 1.0);
  return g;
}

}  // namespace

TEST_CASE("K equal to the cell count leaves every cell alone; K = 1 merges everything") {
  const ScalarGrid g = radiomap::testing::random_grid(6, 7, 1);
  const SuperpixelLabeling all = ers_segment(g, {42});
  CHECK(all.count == 42);
  CHECK(std::set<int>(all.labels.begin(), all.labels.end()).size() == 42);
  const SuperpixelLabeling one = ers_segment(g, {1});
  CHECK(one.count == 1);
  for (int l : one.labels) CHECK(l == 0);
  CHECK_THROWS_AS(ers_segment(g, {43}), Error);
}

TEST_CASE("planted two-region scene is separated exactly") {
  const SuperpixelLabeling l = ers_segment(two_region(16), {2});
  REQUIRE(l.count == 2);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) CHECK(l.at(r, c) == (c < 8 ? 0 : 1));
}

TEST_CASE("segmentation yields exactly K connected segments with first-touch labels") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const int rows = 20 + static_cast<int>(rng() % 20);
    const int cols = 20 + static_cast<int>(rng() % 20);
    ScalarGrid g = radiomap::testing::random_grid(rows, cols, 50 + trial);
    if (trial % 2) {
      // Blocky landscape like a building grid.
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) g.set(r, c, ((r / 5 + c / 7) % 3 == 0) ? 1.0 : 0.0);
    }
    const int k = 2 + static_cast<int>(rng() % 20);
    const SuperpixelLabeling l = ers_segment(g, {k});
    CHECK(l.count == k);
    CHECK(every_label_connected(l));
    int next = 0;
    for (int v : l.labels) {
      CHECK(v <= next);
      if (v == next) ++next;
    }
  }
}

TEST_CASE("segmentation is deterministic") {
  const ScalarGrid g = radiomap::testing::random_grid(32, 32, 9);
  CHECK(ers_segment(g, {12}).labels == ers_segment(g, {12}).labels);
}

TEST_CASE("undefined signal cells are rejected") {
  ScalarGrid g(4, 4, Units::unitless, 0.0);
  g.clear(1, 1);
  CHECK_THROWS_AS(ers_segment(g, {2}), Error);
}

TEST_CASE("template: global mean for K = 1, identity on per-superpixel constants") {
  const ScalarGrid g = radiomap::testing::random_grid(10, 10, 4);
  const RegionMask full(10, 10, true);
  const SuperpixelLabeling one = ers_segment(g, {1});
  double mean = 0.0;
  for (double v : g.raw()) mean += v;
  mean /= 100.0;
  const ScalarGrid t = build_template(g, full, one);
  for (double v : t.raw()) CHECK(std::abs(v - mean) <= 1e-12);

  const SuperpixelLabeling l = ers_segment(g, {6});
  ScalarGrid piecewise(10, 10);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) piecewise.set(r, c, -40.0 - 3.0 * l.at(r, c));
  CHECK(build_template(piecewise, full, l) == piecewise);
}

TEST_CASE("template means use observed cells only; fully missing superpixels stay undefined") {
  SuperpixelLabeling l{2, 4, 2, {0, 0, 1, 1, 0, 0, 1, 1}};
  ScalarGrid g(2, 4);
  const double vals[] = {1, 2, 100, 100, 3, 4, 100, 100};
  for (int i = 0; i < 8; ++i) g.set(i / 4, i % 4, vals[i]);
  RegionMask m(2, 4, true);
  for (int r = 0; r < 2; ++r) {
    m.set_observed(r, 2, false);
    m.set_observed(r, 3, false);
  }
  m.set_observed(1, 1, false);
  const ScalarGrid t = build_template(g, m, l);
  CHECK(t.at(0, 0) == 2.0);  // (1 + 2 + 3) / 3
  CHECK(t.at(1, 1) == 2.0);
  CHECK_FALSE(t.defined(0, 2));
  CHECK(defined_mask(t).count_observed() == 4);
}

TEST_CASE("perturbation examples and the decomposition identity") {
  const ScalarGrid g = radiomap::testing::random_grid(24, 24, 6, -90, -30);
  const RegionMask m = radiomap::testing::rect_mask(24, 24, 6, 6, 9, 9);
  const ScalarGrid h0 = build_perturbation(g, g, m);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c) {
      if (m.observed(r, c)) CHECK(h0.at(r, c) == 0.0);
      else CHECK_FALSE(h0.defined(r, c));
    }
  const ScalarGrid zero(24, 24, Units::dbm, 0.0);
  const ScalarGrid hr = build_perturbation(g, zero, m);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c)
      if (m.observed(r, c)) CHECK(hr.at(r, c) == g.at(r, c));

  const SuperpixelLabeling l = ers_segment(g, {9});
  const ScalarGrid t = build_template(g, m, l);
  const ScalarGrid h = build_perturbation(g, t, m);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c)
      if (m.observed(r, c)) CHECK(std::abs(t.at(r, c) + h.at(r, c) - g.at(r, c)) <= 1e-12);
}
