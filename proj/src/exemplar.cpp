#include "radiomap/exemplar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radiomap {

namespace {

struct Offset {
  int dr;
  int dc;
  double value;
};

// Observed cells of the target patch as offsets from the window origin.
std::vector<Offset> target_offsets(const ScalarGrid& map, const RegionMask& mask, Cell center, int n) {
  const int h = n / 2;
  std::vector<Offset> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const int r = center.row - h + i;
    if (r < 0 || r >= map.rows()) continue;
    for (int j = 0; j < n; ++j) {
      const int c = center.col - h + j;
      if (c < 0 || c >= map.cols() || !mask.observed(r, c)) continue;
      out.push_back({i, j, map(r, c)});
    }
  }
  return out;
}

bool better(double cost, Cell origin, double best_cost, Cell best_origin) {
  return cost < best_cost || (cost == best_cost && origin < best_origin);
}

}  // namespace

SourceWindows source_windows(const RegionMask& mask, int n, int stride) {
  if (n < 1 || stride < 1) throw Error("source_windows: size and stride must be positive");
  const int rows = mask.rows();
  const int cols = mask.cols();
  // Summed-area table of missing cells.
  std::vector<int> sat(static_cast<std::size_t>(rows + 1) * (cols + 1), 0);
  const auto at = [&](int r, int c) -> int& { return sat[static_cast<std::size_t>(r) * (cols + 1) + c]; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      at(r + 1, c + 1) = at(r, c + 1) + at(r + 1, c) - at(r, c) + (mask.missing(r, c) ? 1 : 0);
  SourceWindows out;
  out.size = n;
  for (int r = 0; r + n <= rows; r += stride)
    for (int c = 0; c + n <= cols; c += stride)
      if (at(r + n, c + n) - at(r, c + n) - at(r + n, c) + at(r, c) == 0) out.origins.push_back({r, c});
  return out;
}

int default_stride(int rows, int cols) { return rows * cols <= 256 * 256 ? 1 : 2; }

ExemplarMatch epc_search(const ScalarGrid& map, const RegionMask& mask, Cell center, int n,
                         const SourceWindows& sources, Exec exec) {
  require_same_shape(map, mask, "epc_search");
  if (sources.size != n) throw Error("epc_search: source windows built for another patch size");
  if (sources.origins.empty()) {
    throw Error("epc_search: no fully observed source window; use a smaller patch size");
  }
  const std::vector<Offset> offsets = target_offsets(map, mask, center, n);
  const auto& origins = sources.origins;
  const auto count = static_cast<long>(origins.size());

  if (exec == Exec::serial) {
    ExemplarMatch best{origins.front(), std::numeric_limits<double>::infinity()};
    for (long w = 0; w < count; ++w) {
      const Cell o = origins[w];
      double cost = 0.0;
      for (const auto& off : offsets) {
        const double d = map(o.row + off.dr, o.col + off.dc) - off.value;
        cost += d * d;
      }
      if (better(cost, o, best.cost, best.origin)) best = {o, cost};
    }
    return best;
  }

  // Early abandon is exact: partial sums only grow, and the surviving full
  // sums are accumulated in the same order as the serial path.
  ExemplarMatch best{origins.front(), std::numeric_limits<double>::infinity()};
#pragma omp parallel
  {
    ExemplarMatch local{origins.front(), std::numeric_limits<double>::infinity()};
#pragma omp for schedule(static) nowait
    for (long w = 0; w < count; ++w) {
      const Cell o = origins[w];
      double cost = 0.0;
      bool abandoned = false;
      for (const auto& off : offsets) {
        const double d = map(o.row + off.dr, o.col + off.dc) - off.value;
        cost += d * d;
        if (cost > local.cost) {
          abandoned = true;
          break;
        }
      }
      if (!abandoned && better(cost, o, local.cost, local.origin)) local = {o, cost};
    }
#pragma omp critical(radiomap_epc_reduce)
    if (better(local.cost, local.origin, best.cost, best.origin)) best = local;
  }
  return best;
}

ExemplarMatch epc_search(const ScalarGrid& map, const RegionMask& mask, Cell center, int n,
                         int stride, Exec exec) {
  return epc_search(map, mask, center, n, source_windows(mask, n, stride), exec);
}

std::vector<double> epc_fill(const Patch& target, const ScalarGrid& map, Cell source_origin) {
  const int n = target.size;
  if (source_origin.row < 0 || source_origin.col < 0 || source_origin.row + n > map.rows() ||
      source_origin.col + n > map.cols()) {
    throw Error("epc_fill: source window out of bounds");
  }
  std::vector<double> out(target.values.size(), ScalarGrid::sentinel());
  for (int k = 0; k < n * n; ++k) {
    if (!target.valid[k]) continue;
    if (target.observed[k]) {
      out[k] = target.values[k];
    } else {
      out[k] = map.at(source_origin.row + k / n, source_origin.col + k % n);
    }
  }
  return out;
}

double template_similarity(Cell source_origin, Cell target, int n, const TemplateContext& ctx,
                           const TemplateWeights& weights) {
  const int h = n / 2;
  const int rows = ctx.values.rows();
  const int cols = ctx.values.cols();
  double spectrum = 0.0;
  double depth = 0.0;
  double land = 0.0;
  for (int i = 0; i < n; ++i) {
    const int r = target.row - h + i;
    if (r < 0 || r >= rows) continue;
    for (int j = 0; j < n; ++j) {
      const int c = target.col - h + j;
      if (c < 0 || c >= cols) continue;
      const int sr = source_origin.row + i;
      const int sc = source_origin.col + j;
      if (ctx.mask.observed(r, c)) {
        const double dv = ctx.values(r, c) - ctx.values(sr, sc);
        spectrum += dv * dv;
      }
      const double dw = ctx.depth(r, c) - ctx.depth(sr, sc);
      depth += dw * dw;
      const double dm = ctx.landscape(r, c) - ctx.landscape(sr, sc);
      land += dm * dm;
    }
  }
  const double diag = std::hypot(static_cast<double>(rows), static_cast<double>(cols));
  const double dis =
      std::hypot(double(source_origin.row + h - target.row), double(source_origin.col + h - target.col)) /
      diag;
  return weights.a * spectrum + weights.b * depth + weights.c * land + weights.d * dis;
}

std::vector<ScoredWindow> template_exemplar_select(std::span<const Cell> candidates, Cell target,
                                                   int n, const TemplateContext& ctx,
                                                   const TemplateWeights& weights, int m_top,
                                                   Exec exec) {
  if (candidates.empty()) throw Error("template_exemplar_select: no candidates");
  if (m_top < 1) throw Error("template_exemplar_select: m_top must be >= 1");
  std::vector<ScoredWindow> scored(candidates.size());
  const auto count = static_cast<long>(candidates.size());
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < count; ++i) {
    scored[i] = {candidates[i], template_similarity(candidates[i], target, n, ctx, weights)};
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(m_top), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end(),
                    [](const ScoredWindow& x, const ScoredWindow& y) {
                      return x.score < y.score || (x.score == y.score && x.origin < y.origin);
                    });
  scored.resize(keep);
  return scored;
}

}  // namespace radiomap
