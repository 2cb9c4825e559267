#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "radiomap/grid.hpp"

namespace radiomap {

// RMG1 text grids: header `RMG1 <rows> <cols> <units>`, then one line per row
// of space-separated values with 17 significant digits; `NA` marks undefined
// cells.
std::string format_grid(const ScalarGrid& grid);
ScalarGrid parse_grid(const std::string& text);
void write_grid(const ScalarGrid& grid, const std::filesystem::path& path);
ScalarGrid read_grid(const std::filesystem::path& path);

// Same framing with units tag `mask` and values 1 (observed) / 0 (missing).
std::string format_mask(const RegionMask& mask);
RegionMask parse_mask(const std::string& text);
void write_mask(const RegionMask& mask, const std::filesystem::path& path);
RegionMask read_mask(const std::filesystem::path& path);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

// Binary P5 bytes; values mapped linearly from [lo, hi] to 0..255 and
// clamped. Without a range the defined min/max is used; undefined cells are
// black.
std::string encode_pgm(const ScalarGrid& grid, std::optional<Range> range = std::nullopt);
void render_pgm(const ScalarGrid& grid, const std::filesystem::path& path,
                std::optional<Range> range = std::nullopt);

// Over the region's Omega cells.
double mse(const ScalarGrid& truth, const ScalarGrid& estimate, const RegionMask& region);
double ne(const ScalarGrid& truth, const ScalarGrid& estimate, const RegionMask& region);

// Scene JSON: dims, cell size, buildings as strings of '0'/'1' per row and
// transmitters {x, y, power_dbm[, theta, epsilon]}.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void write_scene(const Scene& scene, const std::filesystem::path& path);
Scene read_scene(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace radiomap
