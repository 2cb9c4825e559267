#pragma once

#include <span>
#include <vector>

#include "radiomap/exec.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

// Origins (top-left cells) of fully observed, fully in-bounds n x n windows,
// row-major.
struct SourceWindows {
  int size = 0;
  std::vector<Cell> origins;
};

SourceWindows source_windows(const RegionMask& mask, int n, int stride);

// 1 for maps up to 256 x 256, 2 beyond.
int default_stride(int rows, int cols);

struct ExemplarMatch {
  Cell origin;
  double cost = 0.0;
};

// Minimum-SSD window over the target patch's observed cells; ties go to the
// first origin in row-major order.
ExemplarMatch epc_search(const ScalarGrid& map, const RegionMask& mask, Cell center, int n,
                         const SourceWindows& sources, Exec exec = Exec::parallel);
ExemplarMatch epc_search(const ScalarGrid& map, const RegionMask& mask, Cell center, int n,
                         int stride, Exec exec = Exec::parallel);

// Observed cells of `target` are kept; missing in-bounds cells are copied
// from the window at `source_origin`. Out-of-bounds entries stay NaN.
std::vector<double> epc_fill(const Patch& target, const ScalarGrid& map, Cell source_origin);

struct TemplateWeights {
  double a = 1.0;   // observed template values
  double b = 1.0;   // depth map
  double c = 0.25;  // landscape
  double d = 0.05;  // centre distance / map diagonal
};

struct TemplateContext {
  const ScalarGrid& values;
  const RegionMask& mask;
  const ScalarGrid& depth;
  const ScalarGrid& landscape;
};

// SIM between the window at `source_origin` and the patch centred at `target`.
double template_similarity(Cell source_origin, Cell target, int n, const TemplateContext& ctx,
                           const TemplateWeights& weights);

struct ScoredWindow {
  Cell origin;
  double score = 0.0;
};

// The m_top lowest-SIM candidates, ascending by (score, origin).
std::vector<ScoredWindow> template_exemplar_select(std::span<const Cell> candidates, Cell target,
                                                   int n, const TemplateContext& ctx,
                                                   const TemplateWeights& weights, int m_top,
                                                   Exec exec = Exec::parallel);

}  // namespace radiomap
