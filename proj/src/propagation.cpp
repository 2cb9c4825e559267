#include "radiomap/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

namespace radiomap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter t in [0,1] where the ray crosses the next grid line along one axis.
double next_crossing(int cell, int step, double origin, double delta) {
  if (step == 0) return kInf;
  const double line = step > 0 ? cell + 1.0 : static_cast<double>(cell);
  return (line - origin) / delta;
}

const Transmitter& tx_at(const Scene& scene, std::size_t tx_index) {
  if (tx_index >= scene.transmitters.size()) throw Error("transmitter index out of range");
  return scene.transmitters[tx_index];
}

double clamped_distance_m(const Scene& scene, Point from, Cell p) {
  const Point c = cell_center(p);
  const double d = std::hypot(c.x - from.x, c.y - from.y) * scene.cell_size_m;
  return std::max(d, 0.5 * scene.cell_size_m);
}

}  // namespace

RayTraversal traverse(int rows, int cols, Point from, Point to) {
  const auto inside = [&](Point p) {
    return p.x >= 0.0 && p.x <= cols && p.y >= 0.0 && p.y <= rows;
  };
  if (!inside(from) || !inside(to)) throw Error("ray endpoints must lie within the grid");

  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  RayTraversal ray;
  ray.length = std::hypot(dx, dy);

  int cx = std::clamp(static_cast<int>(std::floor(from.x)), 0, cols - 1);
  int cy = std::clamp(static_cast<int>(std::floor(from.y)), 0, rows - 1);
  if (ray.length == 0.0) {
    ray.segments.push_back({{cy, cx}, 0.0});
    return ray;
  }

  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  double t = 0.0;
  for (;;) {
    const double tx = next_crossing(cx, step_x, from.x, dx);
    const double ty = next_crossing(cy, step_y, from.y, dy);
    const double t_next = std::min({tx, ty, 1.0});
    if (t_next > t) ray.segments.push_back({{cy, cx}, (t_next - t) * ray.length});
    if (t_next >= 1.0) break;
    t = std::max(t, t_next);
    if (tx <= ty) cx += step_x;
    if (ty <= tx) cy += step_y;
    if (cx < 0 || cx >= cols || cy < 0 || cy >= rows) break;
  }
  return ray;
}

RayTraversal traverse(const Scene& scene, Point from, Cell to) {
  return traverse(scene.rows, scene.cols, from, cell_center(to));
}

double block_term(const Scene& scene, Point from, Cell p) {
  const RayTraversal ray = traverse(scene, from, p);
  double total = 0.0;
  double open = 0.0;
  for (const auto& seg : ray.segments) {
    total += seg.length;
    if (!scene.is_building(seg.cell.row, seg.cell.col)) open += seg.length;
  }
  if (total == 0.0) return 1.0;
  return open / total;
}

double block_term(const Scene& scene, std::size_t tx_index, Cell p) {
  return block_term(scene, tx_at(scene, tx_index).position, p);
}

double tx_distance_m(const Scene& scene, std::size_t tx_index, Cell p) {
  return clamped_distance_m(scene, tx_at(scene, tx_index).position, p);
}

double radio_factor(const Scene& scene, std::size_t tx_index, Cell p, Vec2 normal, double beta) {
  const double nn = std::hypot(normal.x, normal.y);
  if (!(nn > 0.0)) throw Error("radio_factor: boundary normal must be non-zero");
  const Point tx = tx_at(scene, tx_index).position;
  const Point c = cell_center(p);
  const Vec2 l{c.x - tx.x, c.y - tx.y};
  const double ll = std::hypot(l.x, l.y);
  if (ll == 0.0) return 0.0;
  const double d = std::max(ll * scene.cell_size_m, 0.5 * scene.cell_size_m);
  const double cosine = std::abs(dot(l, normal)) / (ll * nn);
  return std::pow(d, -beta) * cosine;
}

LdplFit ldpl_fit(const ScalarGrid& radiomap, const RegionMask& mask, const Scene& scene,
                 std::size_t tx_index) {
  require_same_shape(radiomap, mask, "ldpl_fit");
  const Point tx = tx_at(scene, tx_index).position;
  std::vector<double> logd;
  std::vector<double> values;
  std::set<double> distinct;
  for (int r = 0; r < radiomap.rows(); ++r) {
    for (int c = 0; c < radiomap.cols(); ++c) {
      if (!mask.observed(r, c) || !radiomap.defined(r, c)) continue;
      const double d = clamped_distance_m(scene, tx, {r, c});
      logd.push_back(std::log10(d));
      values.push_back(radiomap(r, c));
      distinct.insert(d);
    }
  }
  if (distinct.size() < 2) throw Error("ldpl_fit: need at least two distinct observed distances");

  const auto m = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = -logd[i];
    rhs(i) = values[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 2) throw Error("ldpl_fit: singular regression (insufficient spatial spread)");
  const Eigen::VectorXd coef = qr.solve(rhs);
  LdplFit fit;
  fit.theta = coef(0);
  fit.epsilon = coef(1);
  fit.rmse = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(m));
  fit.observations = values.size();
  return fit;
}

JointLdplFit ldpl_fit_joint(const ScalarGrid& radiomap, const RegionMask& mask, const Scene& scene) {
  require_same_shape(radiomap, mask, "ldpl_fit_joint");
  const auto ntx = static_cast<Eigen::Index>(scene.transmitters.size());
  if (ntx == 0) throw Error("ldpl_fit_joint: scene has no transmitters");
  std::vector<Cell> cells;
  for (int r = 0; r < radiomap.rows(); ++r)
    for (int c = 0; c < radiomap.cols(); ++c)
      if (mask.observed(r, c) && radiomap.defined(r, c)) cells.push_back({r, c});
  const auto m = static_cast<Eigen::Index>(cells.size());
  if (m < ntx + 1) throw Error("ldpl_fit_joint: too few observed cells");

  Eigen::MatrixXd design(m, ntx + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    for (Eigen::Index t = 0; t < ntx; ++t) {
      design(i, t + 1) = -std::log10(tx_distance_m(scene, static_cast<std::size_t>(t), cells[i]));
    }
    rhs(i) = radiomap(cells[i].row, cells[i].col);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < ntx + 1) {
    throw Error("ldpl_fit_joint: singular regression (insufficient spatial spread)");
  }
  const Eigen::VectorXd coef = qr.solve(rhs);
  JointLdplFit fit;
  fit.theta = coef(0);
  fit.epsilon.assign(coef.data() + 1, coef.data() + coef.size());
  fit.rmse = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(m));
  return fit;
}

double ldpl_predict(const JointLdplFit& fit, const Scene& scene, Cell p) {
  double v = fit.theta;
  for (std::size_t t = 0; t < fit.epsilon.size(); ++t) {
    v -= fit.epsilon[t] * std::log10(tx_distance_m(scene, t, p));
  }
  return v;
}

ScalarGrid depth_field(const Scene& scene, const DepthParams& params, const ScalarGrid* radiomap,
                       const RegionMask* mask, Exec exec) {
  scene.validate();
  const std::size_t ntx = scene.transmitters.size();
  if (ntx == 0) throw Error("depth map needs at least one transmitter");

  // Per-transmitter IDW scale or LDPL coefficients.
  std::vector<double> idw_scale(ntx, 1.0);
  std::vector<LdplParams> ldpl(ntx);
  if (params.model == DepthModel::idw) {
    double p_ref = -kInf;
    for (const auto& tx : scene.transmitters) p_ref = std::max(p_ref, tx.power_dbm);
    for (std::size_t i = 0; i < ntx; ++i) {
      idw_scale[i] = std::pow(10.0, (scene.transmitters[i].power_dbm - p_ref) / 10.0);
    }
  } else {
    for (std::size_t i = 0; i < ntx; ++i) {
      if (scene.transmitters[i].ldpl) {
        ldpl[i] = *scene.transmitters[i].ldpl;
        continue;
      }
      if (radiomap == nullptr || mask == nullptr) {
        throw Error("LDPL depth map needs a radiomap and mask to fit transmitter parameters");
      }
      if (mask->count_observed() < 10 * ntx) {
        throw Error("LDPL depth map needs at least 10 observed cells per transmitter");
      }
      const LdplFit fit = ldpl_fit(*radiomap, *mask, scene, i);
      ldpl[i] = {fit.theta, fit.epsilon};
    }
  }

  ScalarGrid field(scene.rows, scene.cols, Units::unitless, 0.0);
  const int rows = scene.rows;
  const int cols = scene.cols;
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < ntx; ++i) {
        const double d = tx_distance_m(scene, i, {r, c});
        const double e = params.model == DepthModel::idw
                             ? idw_scale[i] * std::pow(d, -params.sigma)
                             : ldpl[i].theta - ldpl[i].epsilon * std::log10(d);
        sum += e * block_term(scene, i, {r, c});
      }
      field.set(r, c, sum);
    }
  }
  return field;
}

DepthMap depth_map(const Scene& scene, const DepthParams& params, const ScalarGrid* radiomap,
                   const RegionMask* mask, Exec exec) {
  const ScalarGrid field = depth_field(scene, params, radiomap, mask, exec);
  const auto [lo, hi] = std::minmax_element(field.raw().begin(), field.raw().end());
  DepthMap out{ScalarGrid(scene.rows, scene.cols, Units::normalized, 0.0), false};
  const double span = *hi - *lo;
  if (!(span > 0.0)) {
    out.degenerate = true;
    return out;
  }
  for (int r = 0; r < scene.rows; ++r)
    for (int c = 0; c < scene.cols; ++c) out.values.set(r, c, (field(r, c) - *lo) / span);
  return out;
}

}  // namespace radiomap
