#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radiomap/error.hpp"

namespace radiomap {

enum class Units { dbm, normalized, unitless };

std::string_view to_string(Units units);
Units units_from_string(std::string_view text);

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

// Continuous plane coordinates: x runs along columns, y along rows, and cell
// (r, c) covers [c, c+1) x [r, r+1).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point cell_center(Cell cell) { return {cell.col + 0.5, cell.row + 0.5}; }

// Row-major P x Q grid of reals. Cells may be undefined (the internal
// sentinel, stored as NaN); `at` refuses to read them.
class ScalarGrid {
 public:
  ScalarGrid() = default;
  ScalarGrid(int rows, int cols, Units units = Units::dbm, double fill = 0.0);

  static ScalarGrid undefined(int rows, int cols, Units units = Units::dbm);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Units units() const { return units_; }
  void set_units(Units units) { units_ = units; }

  bool contains(Cell cell) const {
    return cell.row >= 0 && cell.row < rows_ && cell.col >= 0 && cell.col < cols_;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }

  bool defined(int row, int col) const { return !is_sentinel(data_[index(row, col)]); }
  bool defined(Cell cell) const { return defined(cell.row, cell.col); }

  // Checked read; throws on out-of-bounds or undefined cells.
  double at(int row, int col) const;
  double at(Cell cell) const { return at(cell.row, cell.col); }

  // Unchecked raw read for kernels; undefined cells read as NaN.
  double operator()(int row, int col) const { return data_[index(row, col)]; }

  // Throws on non-finite values.
  void set(int row, int col, double value);
  void set(Cell cell, double value) { set(cell.row, cell.col, value); }
  void clear(int row, int col) { data_[index(row, col)] = sentinel(); }

  std::span<const double> raw() const { return data_; }

  std::size_t count_defined() const;

  friend bool operator==(const ScalarGrid&, const ScalarGrid&);

  static constexpr double sentinel() { return std::numeric_limits<double>::quiet_NaN(); }
  static bool is_sentinel(double v) { return v != v; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Units units_ = Units::dbm;
  std::vector<double> data_;
};

// Observed (Phi, true) vs missing (Omega, false) cells.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int rows, int cols, bool observed = true);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return observed_.size(); }
  bool contains(Cell cell) const {
    return cell.row >= 0 && cell.row < rows_ && cell.col >= 0 && cell.col < cols_;
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }

  bool observed(int row, int col) const { return observed_[index(row, col)] != 0; }
  bool observed(Cell cell) const { return observed(cell.row, cell.col); }
  bool missing(int row, int col) const { return !observed(row, col); }
  bool missing(Cell cell) const { return !observed(cell); }
  void set_observed(int row, int col, bool value) { observed_[index(row, col)] = value ? 1 : 0; }
  void set_observed(Cell cell, bool value) { set_observed(cell.row, cell.col, value); }

  std::span<const std::uint8_t> raw() const { return observed_; }

  std::size_t count_observed() const;
  std::size_t count_missing() const { return size() - count_observed(); }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> observed_;
};

struct LdplParams {
  double theta = 0.0;
  double epsilon = 0.0;
};

struct Transmitter {
  Point position;
  double power_dbm = 0.0;
  std::optional<LdplParams> ldpl;
};

struct Scene {
  int rows = 0;
  int cols = 0;
  double cell_size_m = 1.0;
  std::vector<std::uint8_t> buildings;  // row-major, 1 = building
  std::vector<Transmitter> transmitters;

  Scene() = default;
  Scene(int rows, int cols, double cell_size_m = 1.0);

  bool is_building(int row, int col) const {
    return buildings[static_cast<std::size_t>(row) * cols + col] != 0;
  }
  void set_building(int row, int col, bool value) {
    buildings[static_cast<std::size_t>(row) * cols + col] = value ? 1 : 0;
  }

  // Landscape m(Z) as a 0/1 grid.
  ScalarGrid landscape() const;

  // Throws unless dims, cell size and transmitter positions are valid.
  void validate() const;
};

// n x n window around `center`, clipped to the grid. Entries are row-major in
// patch coordinates; offset k maps to cell (center.row - n/2 + k/n,
// center.col - n/2 + k%n).
struct Patch {
  Cell center;
  int size = 0;
  std::vector<std::uint8_t> valid;     // in bounds
  std::vector<std::uint8_t> observed;  // valid and in Phi
  std::vector<double> values;          // observed ? value : NaN

  int half() const { return size / 2; }
  Cell cell_at(int k) const {
    return {center.row - half() + k / size, center.col - half() + k % size};
  }
  int valid_count() const;
  int observed_count() const;
};

// Omega cells with at least one 8-neighbour in Phi, row-major.
std::vector<Cell> boundary(const RegionMask& mask);

Patch extract_patch(const ScalarGrid& grid, const RegionMask& mask, Cell center, int n);

struct AffineParams {
  double min = 0.0;
  double span = 1.0;
};

struct Normalized {
  ScalarGrid grid;
  AffineParams params;
};

// Min-max over Phi only. Every defined cell is mapped with the same params.
Normalized normalize(const ScalarGrid& grid, const RegionMask& mask);
ScalarGrid denormalize(const ScalarGrid& grid, const AffineParams& params, Units units = Units::dbm);

void require_same_shape(const ScalarGrid& grid, const RegionMask& mask, std::string_view what);

}  // namespace radiomap
