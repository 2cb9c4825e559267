#include "radiomap/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "radiomap/propagation.hpp"

namespace radiomap {

namespace {

struct Sample {
  double x;
  double y;
  double v;
};

std::vector<Sample> observed_samples(const ScalarGrid& map, const RegionMask& mask) {
  std::vector<Sample> out;
  out.reserve(mask.count_observed());
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c)
      if (mask.observed(r, c)) out.push_back({c + 0.5, r + 0.5, map.at(r, c)});
  if (out.empty()) throw Error("baseline: no observed cells");
  return out;
}

std::vector<Cell> missing_cells(const RegionMask& mask) {
  std::vector<Cell> out;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.missing(r, c)) out.push_back({r, c});
  return out;
}

}  // namespace

ScalarGrid mean_fill(const ScalarGrid& map, const RegionMask& mask) {
  require_same_shape(map, mask, "mean_fill");
  const std::vector<Sample> obs = observed_samples(map, mask);
  double sum = 0.0;
  for (const auto& s : obs) sum += s.v;
  const double mean = sum / static_cast<double>(obs.size());
  ScalarGrid out = map;
  for (const Cell& p : missing_cells(mask)) out.set(p, mean);
  return out;
}

ScalarGrid idw_interp(const ScalarGrid& map, const RegionMask& mask, const IdwParams& params, Exec exec) {
  require_same_shape(map, mask, "idw_interp");
  if (!(params.power > 0.0)) throw Error("idw_interp: power must be > 0");
  if (params.neighbors < 0) throw Error("idw_interp: neighbors must be >= 0");
  const std::vector<Sample> obs = observed_samples(map, mask);
  const std::vector<Cell> targets = missing_cells(mask);
  const std::size_t k = params.neighbors == 0 ? obs.size()
                                              : std::min<std::size_t>(params.neighbors, obs.size());
  std::vector<double> result(targets.size());
  const bool parallel = exec == Exec::parallel;

#pragma omp parallel if (parallel)
  {
    std::vector<std::pair<double, std::size_t>> dist(obs.size());
#pragma omp for schedule(static)
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Point q = cell_center(targets[t]);
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const double dx = obs[i].x - q.x;
        const double dy = obs[i].y - q.y;
        dist[i] = {dx * dx + dy * dy, i};
      }
      if (k < obs.size()) std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      // Sum in a fixed order so serial and parallel runs agree bit for bit.
      std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
      double wsum = 0.0;
      double vsum = 0.0;
      bool exact = false;
      for (std::size_t j = 0; j < k; ++j) {
        if (dist[j].first == 0.0) {
          result[t] = obs[dist[j].second].v;
          exact = true;
          break;
        }
        const double w = std::pow(dist[j].first, -0.5 * params.power);
        wsum += w;
        vsum += w * obs[dist[j].second].v;
      }
      if (!exact) result[t] = vsum / wsum;
    }
  }

  ScalarGrid out = map;
  for (std::size_t t = 0; t < targets.size(); ++t) out.set(targets[t], result[t]);
  return out;
}

ScalarGrid rbf_interp(const ScalarGrid& map, const RegionMask& mask, const RbfParams& params, Exec exec) {
  require_same_shape(map, mask, "rbf_interp");
  if (params.centers_cap < 3) throw Error("rbf_interp: centers_cap must be >= 3");
  if (!(params.ridge >= 0.0)) throw Error("rbf_interp: ridge must be >= 0");
  if (params.kernel == RbfKernel::gaussian && !(params.scale > 0.0)) {
    throw Error("rbf_interp: gaussian scale must be > 0");
  }
  std::vector<Sample> obs = observed_samples(map, mask);
  if (obs.size() > static_cast<std::size_t>(params.centers_cap)) {
    std::vector<std::size_t> order(obs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(params.seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(params.centers_cap));
    std::sort(order.begin(), order.end());
    std::vector<Sample> picked;
    picked.reserve(order.size());
    for (std::size_t i : order) picked.push_back(obs[i]);
    obs = std::move(picked);
  }

  const auto kernel = [&](double r2) {
    if (params.kernel == RbfKernel::gaussian) return std::exp(-r2 / (params.scale * params.scale));
    return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;  // r^2 log r
  };

  const Eigen::Index m = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index sys = m + 3;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(sys, sys);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dx = obs[i].x - obs[j].x;
      const double dy = obs[i].y - obs[j].y;
      a(i, j) = kernel(dx * dx + dy * dy);
    }
    a(i, i) += params.ridge;
    a(i, m) = a(m, i) = 1.0;
    a(i, m + 1) = a(m + 1, i) = obs[i].x;
    a(i, m + 2) = a(m + 2, i) = obs[i].y;
    rhs(i) = obs[i].v;
  }
  const Eigen::VectorXd coef = a.partialPivLu().solve(rhs);
  const double res = (a * coef - rhs).norm();
  if (!coef.allFinite() || !(res <= 1e-6 * std::max(1.0, rhs.norm()))) {
    throw Error("rbf_interp: ill-conditioned system (residual " + std::to_string(res) + ")");
  }

  const std::vector<Cell> targets = missing_cells(mask);
  std::vector<double> result(targets.size());
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Point q = cell_center(targets[t]);
    double v = coef(m) + coef(m + 1) * q.x + coef(m + 2) * q.y;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dx = obs[j].x - q.x;
      const double dy = obs[j].y - q.y;
      v += coef(j) * kernel(dx * dx + dy * dy);
    }
    result[t] = v;
  }
  ScalarGrid out = map;
  for (std::size_t t = 0; t < targets.size(); ++t) out.set(targets[t], result[t]);
  return out;
}

ScalarGrid mbi(const ScalarGrid& map, const RegionMask& mask, const Scene& scene) {
  require_same_shape(map, mask, "mbi");
  const JointLdplFit fit = ldpl_fit_joint(map, mask, scene);
  ScalarGrid out = map;
  for (const Cell& p : missing_cells(mask)) out.set(p, ldpl_predict(fit, scene, p));
  return out;
}

}  // namespace radiomap
