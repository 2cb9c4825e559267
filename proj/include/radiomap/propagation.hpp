#pragma once

#include <cstddef>
#include <vector>

#include "radiomap/exec.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct RaySegment {
  Cell cell;
  double length = 0.0;  // in cell units
};

// Cells crossed by a straight segment, in order, with exact intersection
// lengths. Lengths sum to the Euclidean segment length.
struct RayTraversal {
  std::vector<RaySegment> segments;
  double length = 0.0;
};

RayTraversal traverse(int rows, int cols, Point from, Point to);
RayTraversal traverse(const Scene& scene, Point from, Cell to);

// Fraction of the transmitter -> cell-centre path that is not inside a
// building; 1 for zero-length paths.
double block_term(const Scene& scene, Point from, Cell p);
double block_term(const Scene& scene, std::size_t tx_index, Cell p);

// Distance in metres between a transmitter and a cell centre, clamped below
// at half a cell.
double tx_distance_m(const Scene& scene, std::size_t tx_index, Cell p);

// L(p) = d^-beta * |l_hat . n_hat|; 0 when p coincides with the transmitter.
double radio_factor(const Scene& scene, std::size_t tx_index, Cell p, Vec2 normal, double beta);

enum class DepthModel { idw, ldpl };

struct DepthParams {
  DepthModel model = DepthModel::idw;
  double sigma = 0.01;
};

struct DepthMap {
  ScalarGrid values;        // in [0, 1]
  bool degenerate = false;  // pre-normalisation field had zero span
};

struct LdplFit {
  double theta = 0.0;
  double epsilon = 0.0;
  double rmse = 0.0;
  std::size_t observations = 0;
};

// r ~ theta - epsilon * log10(d_m) over observed cells.
LdplFit ldpl_fit(const ScalarGrid& radiomap, const RegionMask& mask, const Scene& scene,
                 std::size_t tx_index);

struct JointLdplFit {
  double theta = 0.0;
  std::vector<double> epsilon;  // one per transmitter
  double rmse = 0.0;
};

// r ~ theta - sum_i epsilon_i * log10(d_i) over observed cells.
JointLdplFit ldpl_fit_joint(const ScalarGrid& radiomap, const RegionMask& mask, const Scene& scene);

double ldpl_predict(const JointLdplFit& fit, const Scene& scene, Cell p);

// Sum_i E_i * B_i before normalisation. `radiomap`/`mask` are only read for
// the LDPL model when a transmitter carries no fitted parameters.
ScalarGrid depth_field(const Scene& scene, const DepthParams& params, const ScalarGrid* radiomap,
                       const RegionMask* mask, Exec exec = Exec::parallel);

DepthMap depth_map(const Scene& scene, const DepthParams& params, const ScalarGrid* radiomap = nullptr,
                   const RegionMask* mask = nullptr, Exec exec = Exec::parallel);

}  // namespace radiomap
