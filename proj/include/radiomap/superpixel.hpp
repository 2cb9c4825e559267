#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "radiomap/grid.hpp"

namespace radiomap {

// Partition of the grid into `count` 4-connected segments labelled
// 0..count-1 in first-touch row-major order.
struct SuperpixelLabeling {
  int rows = 0;
  int cols = 0;
  int count = 0;
  std::vector<int> labels;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * cols + col]; }
};

struct ErsParams {
  int superpixels = 0;              // K; 0 = cells / 256
  std::optional<double> alpha;      // balancing weight; balance * K * max dH / max dB when unset
  double balance = 0.5;
  std::optional<double> bandwidth;  // Gaussian h; std of edge differences when unset
};

// Instrumentation of one segmentation run.
struct ErsTrace {
  double alpha = 0.0;
  double bandwidth = 0.0;
  double initial_objective = 0.0;
  std::vector<double> objective;  // H + alpha*B after each accepted edge
  std::vector<std::pair<int, int>> accepted;  // node indices of accepted edges
};

int default_superpixel_count(int rows, int cols);

// Entropy-rate superpixels: lazy greedy edge insertion on the 4-connected
// pixel graph maximising H(A) + alpha * B(A) until `K` components remain.
SuperpixelLabeling ers_segment(const ScalarGrid& signal, const ErsParams& params,
                               ErsTrace* trace = nullptr);

// t = mean of observed values per superpixel; fully missing superpixels stay
// undefined.
ScalarGrid build_template(const ScalarGrid& radiomap, const RegionMask& mask,
                          const SuperpixelLabeling& labeling);

// h = r - t on Phi; Omega stays undefined.
ScalarGrid build_perturbation(const ScalarGrid& radiomap, const ScalarGrid& templ,
                              const RegionMask& mask);

// Observed where the grid is defined.
RegionMask defined_mask(const ScalarGrid& grid);

// Labels as a unitless grid for export.
ScalarGrid labeling_grid(const SuperpixelLabeling& labeling);

}  // namespace radiomap
