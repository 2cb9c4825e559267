#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radiomap/grid.hpp"

namespace radiomap {

struct Rect {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
};

struct TxSpec {
  Point position;  // plane coordinates in cells
  double power_dbm = 46.0;
  double path_loss_exponent = 3.0;
  double height_m = 0.0;  // antenna height above the (ground-level) receivers
};

struct ShadowingSpec {
  bool enabled = false;
  double correlation_length_m = 20.0;
  double sigma_db = 3.0;
};

struct RandomHoles {
  int count = 1;
  int size = 16;
  std::uint64_t seed = 0;
};

// One mask to emit alongside a scenario: a rectangle or seeded random holes.
struct HoleSpec {
  std::optional<Rect> rect;
  std::optional<RandomHoles> random;
};

struct ScenarioSpec {
  int rows = 0;
  int cols = 0;
  double cell_size_m = 1.0;
  std::vector<Rect> buildings;
  std::vector<TxSpec> transmitters;
  double wall_attenuation_db_per_m = 0.0;
  ShadowingSpec shadowing;
  std::uint64_t seed = 0;
  std::vector<HoleSpec> holes;  // masks for `generate` output; unused by generate()

  void validate() const;
};

struct Scenario {
  ScalarGrid truth;  // dBm
  Scene scene;
};

// Log-distance path loss per transmitter, minus wall attenuation along the
// direct ray, plus a shared correlated shadowing field; transmitters are
// combined in linear power.
Scenario generate(const ScenarioSpec& spec);

// Seeded zero-mean field with standard deviation sigma_db, Gaussian-smoothed
// to the correlation length. Deterministic and independent of threading.
ScalarGrid shadow_field(int rows, int cols, double cell_size_m, const ShadowingSpec& spec,
                        std::uint64_t seed);

// Omega = the given rectangle (clipped holes are rejected).
RegionMask make_mask(int rows, int cols, const Rect& hole);
// `count` non-overlapping size x size holes at seeded positions.
RegionMask make_mask(int rows, int cols, const RandomHoles& holes);
RegionMask make_mask(int rows, int cols, const HoleSpec& hole);

// Benchmark scene: city blocks, 1-3 transmitters, walls and shadowing.
ScenarioSpec suite_scenario(int rows, int cols, int transmitters, std::uint64_t seed);

ScenarioSpec scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec read_scenario(const std::filesystem::path& path);

}  // namespace radiomap
