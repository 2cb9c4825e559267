#pragma once

#include <span>
#include <vector>

#include "radiomap/exec.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/propagation.hpp"

namespace radiomap {

inline constexpr double kDataScalarFloor = 1e-3;

// C(v): 1 on the initial Phi, 0 on the initial Omega.
ScalarGrid initial_confidence(const RegionMask& mask);

// C(p) = n^-2 * sum of C(v) over observed cells of the patch. Clipped
// patches still divide by n^2.
double confidence(const ScalarGrid& field, const RegionMask& mask, Cell center, int n);

// Unit-free normal of the fill front at p: central-difference gradient of the
// Omega indicator, or the direction to the nearest Phi cell when that is zero.
Vec2 boundary_normal(const RegionMask& mask, Cell p);

// Max-magnitude gradient over observed cells of the patch.
Vec2 patch_gradient(const ScalarGrid& values, const RegionMask& mask, Cell center, int n);

// D(p) = |<s_p, n_p>| / (|s_p| |n_p|), floored at kDataScalarFloor.
double data_scalar(const ScalarGrid& values, const RegionMask& mask, Cell center, int n);

// V(p) = count / (count + sum of squared deviations of W over observed cells).
double depth_factor(const ScalarGrid& depth, const RegionMask& mask, Cell center, int n);

struct PriorityRecord {
  Cell center;
  double confidence = 0.0;
  double data = 0.0;
  double propagation = 0.0;  // sum_i w_i B_i L_i, or V(p)
  double priority = 0.0;
};

struct PropagationPriority {
  double beta = 2.0;
  std::vector<double> tx_weights;  // empty = all 1
  bool enabled = true;             // false gives B*L == 1 (classic exemplar order)
};

// Sum_i w_i * B_i(p) * L_i(p).
double propagation_term(const Scene& scene, const RegionMask& mask, Cell p,
                        const PropagationPriority& params);

PriorityRecord patch_priority_small(const Scene& scene, const ScalarGrid& radiomap,
                                    const RegionMask& mask, const ScalarGrid& confidence_field,
                                    Cell center, int n, const PropagationPriority& params);

PriorityRecord patch_priority_template(const ScalarGrid& depth, const ScalarGrid& values,
                                       const RegionMask& mask, const ScalarGrid& confidence_field,
                                       Cell center, int n);

// Each listed cell gets C(u) = c_q. Cells already observed before the fill
// must not be passed.
void update_confidence(ScalarGrid& field, std::span<const Cell> filled, double c_q);

std::vector<PriorityRecord> score_front_small(const Scene& scene, const ScalarGrid& radiomap,
                                              const RegionMask& mask,
                                              const ScalarGrid& confidence_field,
                                              std::span<const Cell> front, int n,
                                              const PropagationPriority& params,
                                              Exec exec = Exec::parallel);

std::vector<PriorityRecord> score_front_template(const ScalarGrid& depth, const ScalarGrid& values,
                                                 const RegionMask& mask,
                                                 const ScalarGrid& confidence_field,
                                                 std::span<const Cell> front, int n,
                                                 Exec exec = Exec::parallel);

struct Selection {
  std::size_t index = 0;
  bool fallback = false;  // max priority was 0; ranked by confidence instead
};

// Argmax of priority, lowest index on ties; when every priority is 0 the
// argmax of confidence is used.
Selection select_patch(std::span<const PriorityRecord> records);

}  // namespace radiomap
