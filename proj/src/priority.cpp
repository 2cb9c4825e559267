#include "radiomap/priority.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radiomap {

namespace {

bool usable(const ScalarGrid& values, const RegionMask& mask, int r, int c) {
  return r >= 0 && r < mask.rows() && c >= 0 && c < mask.cols() && mask.observed(r, c) &&
         values.defined(r, c);
}

// One component of the discrete gradient at an observed cell: central where
// both neighbours are usable, one-sided otherwise, 0 when isolated.
double axis_difference(const ScalarGrid& values, const RegionMask& mask, int r, int c, int dr,
                       int dc) {
  const bool fwd = usable(values, mask, r + dr, c + dc);
  const bool back = usable(values, mask, r - dr, c - dc);
  if (fwd && back) return 0.5 * (values(r + dr, c + dc) - values(r - dr, c - dc));
  if (fwd) return values(r + dr, c + dc) - values(r, c);
  if (back) return values(r, c) - values(r - dr, c - dc);
  return 0.0;
}

double indicator(const RegionMask& mask, Cell p, int dr, int dc) {
  const Cell q{p.row + dr, p.col + dc};
  const Cell s = mask.contains(q) ? q : p;
  return mask.missing(s) ? 1.0 : 0.0;
}

}  // namespace

ScalarGrid initial_confidence(const RegionMask& mask) {
  ScalarGrid field(mask.rows(), mask.cols(), Units::unitless, 0.0);
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.observed(r, c)) field.set(r, c, 1.0);
  return field;
}

double confidence(const ScalarGrid& field, const RegionMask& mask, Cell center, int n) {
  const int h = n / 2;
  double sum = 0.0;
  for (int r = center.row - h; r <= center.row + h; ++r) {
    if (r < 0 || r >= mask.rows()) continue;
    for (int c = center.col - h; c <= center.col + h; ++c) {
      if (c < 0 || c >= mask.cols() || !mask.observed(r, c)) continue;
      sum += field(r, c);
    }
  }
  return sum / (static_cast<double>(n) * n);
}

Vec2 boundary_normal(const RegionMask& mask, Cell p) {
  const Vec2 g{0.5 * (indicator(mask, p, 0, 1) - indicator(mask, p, 0, -1)),
               0.5 * (indicator(mask, p, 1, 0) - indicator(mask, p, -1, 0))};
  if (g.x != 0.0 || g.y != 0.0) return g;

  // Fallback: direction to the nearest observed cell (row-major on ties).
  const int max_radius = std::max(mask.rows(), mask.cols());
  double best = std::numeric_limits<double>::infinity();
  Vec2 dir{0.0, 0.0};
  // Cells on ring k are at least k away, so stop once k^2 exceeds the best.
  for (int radius = 1; radius <= max_radius && double(radius) * radius <= best; ++radius) {
    for (int r = p.row - radius; r <= p.row + radius; ++r) {
      for (int c = p.col - radius; c <= p.col + radius; ++c) {
        if (std::max(std::abs(r - p.row), std::abs(c - p.col)) != radius) continue;
        if (!mask.contains({r, c}) || !mask.observed(r, c)) continue;
        const double d2 = double(r - p.row) * (r - p.row) + double(c - p.col) * (c - p.col);
        if (d2 < best || (d2 == best && Cell{r, c} < Cell{p.row + int(dir.y), p.col + int(dir.x)})) {
          best = d2;
          dir = {static_cast<double>(c - p.col), static_cast<double>(r - p.row)};
        }
      }
    }
  }
  return dir;
}

Vec2 patch_gradient(const ScalarGrid& values, const RegionMask& mask, Cell center, int n) {
  const int h = n / 2;
  Vec2 best{0.0, 0.0};
  double best_mag = 0.0;
  for (int r = center.row - h; r <= center.row + h; ++r) {
    for (int c = center.col - h; c <= center.col + h; ++c) {
      if (!usable(values, mask, r, c)) continue;
      const Vec2 g{axis_difference(values, mask, r, c, 0, 1),
                   axis_difference(values, mask, r, c, 1, 0)};
      const double mag = g.x * g.x + g.y * g.y;
      if (mag > best_mag) {
        best_mag = mag;
        best = g;
      }
    }
  }
  return best;
}

double data_scalar(const ScalarGrid& values, const RegionMask& mask, Cell center, int n) {
  const Vec2 g = patch_gradient(values, mask, center, n);
  const Vec2 s{-g.y, g.x};  // isophote
  const Vec2 normal = boundary_normal(mask, center);
  const double ns = std::hypot(s.x, s.y);
  const double nn = std::hypot(normal.x, normal.y);
  if (ns == 0.0 || nn == 0.0) return kDataScalarFloor;
  return std::clamp(std::abs(dot(s, normal)) / (ns * nn), kDataScalarFloor, 1.0);
}

double depth_factor(const ScalarGrid& depth, const RegionMask& mask, Cell center, int n) {
  const int h = n / 2;
  double sum = 0.0;
  int count = 0;
  for (int r = center.row - h; r <= center.row + h; ++r) {
    if (r < 0 || r >= mask.rows()) continue;
    for (int c = center.col - h; c <= center.col + h; ++c) {
      if (c < 0 || c >= mask.cols() || !mask.observed(r, c)) continue;
      sum += depth(r, c);
      ++count;
    }
  }
  if (count == 0) throw Error("depth_factor: patch has no observed cells");
  const double mean = sum / count;
  double ss = 0.0;
  for (int r = center.row - h; r <= center.row + h; ++r) {
    if (r < 0 || r >= mask.rows()) continue;
    for (int c = center.col - h; c <= center.col + h; ++c) {
      if (c < 0 || c >= mask.cols() || !mask.observed(r, c)) continue;
      const double dv = depth(r, c) - mean;
      ss += dv * dv;
    }
  }
  return count / (count + ss);
}

double propagation_term(const Scene& scene, const RegionMask& mask, Cell p,
                        const PropagationPriority& params) {
  if (!params.enabled) return 1.0;
  const Vec2 normal = boundary_normal(mask, p);
  if (normal.x == 0.0 && normal.y == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < scene.transmitters.size(); ++i) {
    const double w = i < params.tx_weights.size() ? params.tx_weights[i] : 1.0;
    sum += w * block_term(scene, i, p) * radio_factor(scene, i, p, normal, params.beta);
  }
  return sum;
}

PriorityRecord patch_priority_small(const Scene& scene, const ScalarGrid& radiomap,
                                    const RegionMask& mask, const ScalarGrid& confidence_field,
                                    Cell center, int n, const PropagationPriority& params) {
  PriorityRecord rec;
  rec.center = center;
  rec.confidence = confidence(confidence_field, mask, center, n);
  rec.data = data_scalar(radiomap, mask, center, n);
  rec.propagation = propagation_term(scene, mask, center, params);
  rec.priority = rec.confidence * rec.data * rec.propagation;
  return rec;
}

PriorityRecord patch_priority_template(const ScalarGrid& depth, const ScalarGrid& values,
                                       const RegionMask& mask, const ScalarGrid& confidence_field,
                                       Cell center, int n) {
  PriorityRecord rec;
  rec.center = center;
  rec.confidence = confidence(confidence_field, mask, center, n);
  rec.data = data_scalar(values, mask, center, n);
  rec.propagation = depth_factor(depth, mask, center, n);
  rec.priority = rec.confidence * rec.data * rec.propagation;
  return rec;
}

void update_confidence(ScalarGrid& field, std::span<const Cell> filled, double c_q) {
  for (const Cell& u : filled) field.set(u, c_q);
}

std::vector<PriorityRecord> score_front_small(const Scene& scene, const ScalarGrid& radiomap,
                                              const RegionMask& mask,
                                              const ScalarGrid& confidence_field,
                                              std::span<const Cell> front, int n,
                                              const PropagationPriority& params, Exec exec) {
  std::vector<PriorityRecord> out(front.size());
  const auto count = static_cast<long>(front.size());
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (long i = 0; i < count; ++i) {
    out[i] = patch_priority_small(scene, radiomap, mask, confidence_field, front[i], n, params);
  }
  return out;
}

std::vector<PriorityRecord> score_front_template(const ScalarGrid& depth, const ScalarGrid& values,
                                                 const RegionMask& mask,
                                                 const ScalarGrid& confidence_field,
                                                 std::span<const Cell> front, int n, Exec exec) {
  std::vector<PriorityRecord> out(front.size());
  const auto count = static_cast<long>(front.size());
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (long i = 0; i < count; ++i) {
    out[i] = patch_priority_template(depth, values, mask, confidence_field, front[i], n);
  }
  return out;
}

Selection select_patch(std::span<const PriorityRecord> records) {
  if (records.empty()) throw Error("select_patch: empty fill front");
  Selection sel;
  double best = -1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].priority > best) {
      best = records[i].priority;
      sel.index = i;
    }
  }
  if (best > 0.0) return sel;
  sel.fallback = true;
  best = -1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].confidence > best) {
      best = records[i].confidence;
      sel.index = i;
    }
  }
  return sel;
}

}  // namespace radiomap
