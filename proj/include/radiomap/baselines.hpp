#pragma once

#include <cstdint>

#include "radiomap/exec.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

// All baselines return a fully defined grid whose Phi cells equal the input.

// Omega = mean of Phi.
ScalarGrid mean_fill(const ScalarGrid& map, const RegionMask& mask);

struct IdwParams {
  double power = 2.0;
  int neighbors = 32;  // 0 or >= |Phi| uses every observed cell
};

// Shepard interpolation over the k nearest observed cell centres.
ScalarGrid idw_interp(const ScalarGrid& map, const RegionMask& mask, const IdwParams& params = {},
                      Exec exec = Exec::parallel);

enum class RbfKernel { thin_plate, gaussian };

struct RbfParams {
  RbfKernel kernel = RbfKernel::thin_plate;
  int centers_cap = 2000;
  double ridge = 1e-8;
  double scale = 8.0;  // Gaussian width in cells
  std::uint64_t seed = 1;
};

// RBF interpolation with a linear polynomial tail, fitted on at most
// centers_cap observed cells (seeded subsample).
ScalarGrid rbf_interp(const ScalarGrid& map, const RegionMask& mask, const RbfParams& params = {},
                      Exec exec = Exec::parallel);

// Joint log-distance regression on all transmitters.
ScalarGrid mbi(const ScalarGrid& map, const RegionMask& mask, const Scene& scene);

}  // namespace radiomap
