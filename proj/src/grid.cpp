#include "radiomap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace radiomap {

std::string_view to_string(Units units) {
  switch (units) {
    case Units::dbm: return "dBm";
    case Units::normalized: return "normalized";
    case Units::unitless: return "unitless";
  }
  return "unitless";
}

Units units_from_string(std::string_view text) {
  if (text == "dBm") return Units::dbm;
  if (text == "normalized") return Units::normalized;
  if (text == "unitless") return Units::unitless;
  throw Error("unknown units tag '" + std::string(text) + "'");
}

ScalarGrid::ScalarGrid(int rows, int cols, Units units, double fill)
    : rows_(rows), cols_(cols), units_(units) {
  if (rows < 1 || cols < 1) throw Error("grid dimensions must be positive");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

ScalarGrid ScalarGrid::undefined(int rows, int cols, Units units) {
  ScalarGrid grid(rows, cols, units);
  std::fill(grid.data_.begin(), grid.data_.end(), sentinel());
  return grid;
}

double ScalarGrid::at(int row, int col) const {
  if (!contains({row, col})) throw Error("grid read out of bounds");
  const double v = data_[index(row, col)];
  if (is_sentinel(v)) {
    throw Error("read of undefined cell (" + std::to_string(row) + ", " + std::to_string(col) + ")");
  }
  return v;
}

void ScalarGrid::set(int row, int col, double value) {
  if (!contains({row, col})) throw Error("grid write out of bounds");
  if (!std::isfinite(value)) throw Error("non-finite value written to grid");
  data_[index(row, col)] = value;
}

std::size_t ScalarGrid::count_defined() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return !is_sentinel(v); }));
}

bool operator==(const ScalarGrid& a, const ScalarGrid& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.units_ != b.units_) return false;
  for (std::size_t i = 0; i < a.data_.size(); ++i) {
    const bool sa = ScalarGrid::is_sentinel(a.data_[i]);
    const bool sb = ScalarGrid::is_sentinel(b.data_[i]);
    if (sa != sb) return false;
    if (!sa && a.data_[i] != b.data_[i]) return false;
  }
  return true;
}

RegionMask::RegionMask(int rows, int cols, bool observed) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw Error("mask dimensions must be positive");
  observed_.assign(static_cast<std::size_t>(rows) * cols, observed ? 1 : 0);
}

std::size_t RegionMask::count_observed() const {
  return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
}

Scene::Scene(int rows_, int cols_, double cell_size)
    : rows(rows_), cols(cols_), cell_size_m(cell_size) {
  if (rows < 1 || cols < 1) throw Error("scene dimensions must be positive");
  buildings.assign(static_cast<std::size_t>(rows) * cols, 0);
}

ScalarGrid Scene::landscape() const {
  ScalarGrid grid(rows, cols, Units::unitless, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (is_building(r, c)) grid.set(r, c, 1.0);
  return grid;
}

void Scene::validate() const {
  if (rows < 1 || cols < 1) throw Error("scene dimensions must be positive");
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) throw Error("cell_size_m must be > 0");
  if (buildings.size() != static_cast<std::size_t>(rows) * cols) {
    throw Error("building grid size does not match scene dimensions");
  }
  for (const auto& tx : transmitters) {
    if (!(tx.position.x >= 0.0 && tx.position.x <= cols && tx.position.y >= 0.0 &&
          tx.position.y <= rows)) {
      throw Error("transmitter position outside the grid");
    }
    if (!std::isfinite(tx.power_dbm)) throw Error("transmitter power must be finite");
  }
}

int Patch::valid_count() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

int Patch::observed_count() const {
  return static_cast<int>(std::count(observed.begin(), observed.end(), std::uint8_t{1}));
}

std::vector<Cell> boundary(const RegionMask& mask) {
  std::vector<Cell> front;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (mask.observed(r, c)) continue;
      bool touches = false;
      for (int dr = -1; dr <= 1 && !touches; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const Cell n{r + dr, c + dc};
          if (mask.contains(n) && mask.observed(n)) {
            touches = true;
            break;
          }
        }
      }
      if (touches) front.push_back({r, c});
    }
  }
  return front;
}

Patch extract_patch(const ScalarGrid& grid, const RegionMask& mask, Cell center, int n) {
  if (n < 3 || n % 2 == 0) throw Error("patch size must be odd and >= 3");
  if (!grid.contains(center)) throw Error("patch center out of bounds");
  require_same_shape(grid, mask, "extract_patch");
  Patch patch;
  patch.center = center;
  patch.size = n;
  const std::size_t len = static_cast<std::size_t>(n) * n;
  patch.valid.assign(len, 0);
  patch.observed.assign(len, 0);
  patch.values.assign(len, ScalarGrid::sentinel());
  for (int k = 0; k < static_cast<int>(len); ++k) {
    const Cell cell = patch.cell_at(k);
    if (!grid.contains(cell)) continue;
    patch.valid[k] = 1;
    if (mask.observed(cell)) {
      patch.observed[k] = 1;
      patch.values[k] = grid(cell.row, cell.col);
    }
  }
  return patch;
}

Normalized normalize(const ScalarGrid& grid, const RegionMask& mask) {
  require_same_shape(grid, mask, "normalize");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (!mask.observed(r, c)) continue;
      const double v = grid.at(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) throw Error("cannot normalize: observed values have zero span");
  Normalized out{ScalarGrid::undefined(grid.rows(), grid.cols(), Units::normalized), {lo, hi - lo}};
  for (int r = 0; r < grid.rows(); ++r)
    for (int c = 0; c < grid.cols(); ++c)
      if (grid.defined(r, c)) out.grid.set(r, c, (grid(r, c) - lo) / out.params.span);
  return out;
}

ScalarGrid denormalize(const ScalarGrid& grid, const AffineParams& params, Units units) {
  ScalarGrid out = ScalarGrid::undefined(grid.rows(), grid.cols(), units);
  for (int r = 0; r < grid.rows(); ++r)
    for (int c = 0; c < grid.cols(); ++c)
      if (grid.defined(r, c)) out.set(r, c, grid(r, c) * params.span + params.min);
  return out;
}

void require_same_shape(const ScalarGrid& grid, const RegionMask& mask, std::string_view what) {
  if (grid.rows() != mask.rows() || grid.cols() != mask.cols()) {
    throw Error(std::string(what) + ": grid and mask dimensions differ");
  }
}

}  // namespace radiomap
