#include "radiomap/inpaint.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace radiomap {

namespace {

using ScoreFn = std::function<std::vector<PriorityRecord>(const ScalarGrid& work, const RegionMask& cur,
                                                          const ScalarGrid& conf,
                                                          const std::vector<Cell>& front)>;
using FillFn = std::function<std::vector<double>(const ScalarGrid& work, const RegionMask& cur,
                                                 const Patch& target)>;

// The shared fill loop: score the front, fill the best patch, update Phi and
// confidence, until Omega is empty.
ScalarGrid fill_loop(const ScalarGrid& map, const RegionMask& mask, int n, const ScoreFn& score,
                     const FillFn& fill, FillLog* log, const char* stage) {
  ScalarGrid work = map;
  RegionMask cur = mask;
  ScalarGrid conf = initial_confidence(mask);
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.missing(r, c)) work.clear(r, c);

  std::size_t missing = cur.count_missing();
  int round = 0;
  while (missing > 0) {
    const std::vector<Cell> front = boundary(cur);
    if (front.empty()) {
      throw Error(std::string(stage) + ": fill front is empty while " + std::to_string(missing) +
                  " cells are missing (no observed cells?)");
    }
    const std::vector<PriorityRecord> records = score(work, cur, conf, front);
    const Selection sel = select_patch(records);
    const PriorityRecord& best = records[sel.index];
    const Patch target = extract_patch(work, cur, best.center, n);
    const std::vector<double> values = fill(work, cur, target);

    std::vector<Cell> filled;
    for (int k = 0; k < n * n; ++k) {
      if (!target.valid[k] || target.observed[k]) continue;
      const Cell cell = target.cell_at(k);
      work.set(cell, values[k]);
      cur.set_observed(cell, true);
      filled.push_back(cell);
    }
    if (filled.empty()) {
      std::ostringstream msg;
      msg << stage << ": no progress in round " << round << " (missing=" << missing
          << ", front=" << front.size() << ", center=(" << best.center.row << "," << best.center.col
          << "), priority=" << best.priority << ")";
      throw Error(msg.str());
    }
    update_confidence(conf, filled, best.confidence);
    missing -= filled.size();
    if (log) log->steps.push_back({best, sel.fallback, static_cast<int>(filled.size())});
    ++round;
  }
  return work;
}

std::shared_ptr<const PatchDictionary> obtain_dictionary(const ScalarGrid& map, const RegionMask& mask,
                                                         int n, const DictionaryParams& params) {
  if (params.pretrained) {
    if (params.pretrained->patch_size() != n) throw Error("pretrained dictionary has another patch size");
    return params.pretrained;
  }
  const Eigen::MatrixXd samples = sample_patches(map, mask, n, params.training_samples, params.ksvd.seed);
  return std::make_shared<const PatchDictionary>(train_ksvd(samples, n, params.ksvd));
}

void check_inputs(const ScalarGrid& map, const RegionMask& mask, int n, const char* stage) {
  require_same_shape(map, mask, stage);
  if (n < 3 || n % 2 == 0) throw Error(std::string(stage) + ": patch size must be odd and >= 3");
  if (mask.count_observed() == 0) throw Error(std::string(stage) + ": no observed cells");
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.observed(r, c) && !map.defined(r, c)) {
        throw Error(std::string(stage) + ": observed cell without a value");
      }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ScalarGrid run_small_scale(const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                           FillMethod method, const SmallScaleParams& params, FillLog* log) {
  const int n = params.patch_size;
  check_inputs(map, mask, n, "run_small_scale");
  if (mask.count_missing() == 0) return map;
  if (params.priority.enabled && scene.transmitters.empty()) {
    throw Error("run_small_scale: propagation priority needs at least one transmitter");
  }
  const int stride = params.stride > 0 ? params.stride : default_stride(map.rows(), map.cols());

  const ScoreFn score = [&](const ScalarGrid& work, const RegionMask& cur, const ScalarGrid& conf,
                            const std::vector<Cell>& front) {
    return score_front_small(scene, work, cur, conf, front, n, params.priority, params.exec);
  };

  if (method == FillMethod::epc) {
    const SourceWindows sources = source_windows(mask, n, stride);
    if (sources.origins.empty()) {
      throw Error("run_small_scale: no fully observed " + std::to_string(n) + "x" + std::to_string(n) +
                  " window; use a smaller patch size");
    }
    const FillFn fill = [&](const ScalarGrid& work, const RegionMask& cur, const Patch& target) {
      const ExemplarMatch match = epc_search(work, cur, target.center, n, sources, params.exec);
      return epc_fill(target, work, match.origin);
    };
    return fill_loop(map, mask, n, score, fill, log, "run_small_scale");
  }

  const auto dict = obtain_dictionary(map, mask, n, params.dictionary);
  const FillFn fill = [&](const ScalarGrid&, const RegionMask&, const Patch& target) {
    return epd_fill(dict->atoms(), target, params.dictionary.lambda);
  };
  return fill_loop(map, mask, n, score, fill, log, "run_small_scale");
}

ScalarGrid run_template(const ScalarGrid& templ, const RegionMask& mask, const Scene& scene,
                        const ScalarGrid& depth, FillMethod method, const TemplateParams& params,
                        FillLog* log) {
  const int n = params.patch_size;
  check_inputs(templ, mask, n, "run_template");
  require_same_shape(depth, mask, "run_template depth");
  if (mask.count_missing() == 0) return templ;
  const int stride = params.stride > 0 ? params.stride : default_stride(templ.rows(), templ.cols());
  const SourceWindows sources = source_windows(mask, n, stride);
  if (sources.origins.empty()) {
    throw Error("run_template: no fully observed " + std::to_string(n) + "x" + std::to_string(n) +
                " window; use a smaller patch size");
  }
  const ScalarGrid landscape = scene.landscape();

  const ScoreFn score = [&](const ScalarGrid& work, const RegionMask& cur, const ScalarGrid& conf,
                            const std::vector<Cell>& front) {
    return score_front_template(depth, work, cur, conf, front, n, params.exec);
  };

  std::shared_ptr<const PatchDictionary> dict;
  if (method == FillMethod::epd) dict = obtain_dictionary(templ, mask, n, params.dictionary);

  const FillFn fill = [&](const ScalarGrid& work, const RegionMask& cur, const Patch& target) {
    const TemplateContext ctx{work, cur, depth, landscape};
    const std::vector<ScoredWindow> ranked = template_exemplar_select(
        sources.origins, target.center, n, ctx, params.weights,
        method == FillMethod::epc ? 1 : params.m_top, params.exec);
    if (method == FillMethod::epc) return epc_fill(target, work, ranked.front().origin);

    // Exemplars join the trained atoms as extra unit-norm columns.
    const Eigen::MatrixXd& base = dict->atoms();
    Eigen::MatrixXd atoms(base.rows(), base.cols() + static_cast<Eigen::Index>(ranked.size()));
    atoms.leftCols(base.cols()) = base;
    Eigen::Index used = base.cols();
    for (const auto& w : ranked) {
      Eigen::VectorXd v(base.rows());
      for (int k = 0; k < n * n; ++k) v(k) = work.at(w.origin.row + k / n, w.origin.col + k % n);
      const double norm = v.norm();
      if (norm > 0.0) atoms.col(used++) = v / norm;
    }
    atoms.conservativeResize(Eigen::NoChange, used);
    return epd_fill(atoms, target, params.dictionary.lambda);
  };
  return fill_loop(templ, mask, n, score, fill, log, "run_template");
}

ScalarGrid giw_smooth(const ScalarGrid& grid, const RegionMask& region, double epsilon, int passes,
                      Exec exec) {
  require_same_shape(grid, region, "giw_smooth");
  if (!(epsilon > 0.0)) throw Error("giw_smooth: epsilon must be > 0");
  ScalarGrid cur = grid;
  const int rows = grid.rows();
  const int cols = grid.cols();
  const bool parallel = exec == Exec::parallel;
  for (int pass = 0; pass < passes; ++pass) {
    ScalarGrid next = cur;
#pragma omp parallel for schedule(static) if (parallel)
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (region.observed(r, c)) continue;
        const double center = cur.at(r, c);
        double wsum = 0.0;
        double vsum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols || !cur.defined(rr, cc)) continue;
            const double v = cur(rr, cc);
            const double w = 1.0 / (std::abs(v - center) + epsilon);
            wsum += w;
            vsum += w * v;
          }
        }
        next.set(r, c, vsum / wsum);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

TpiResult run_tpi(const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                  const TpiParams& params) {
  check_inputs(map, mask, 3, "run_tpi");
  if (mask.count_missing() == 0) throw Error("run_tpi: nothing to inpaint (Omega is empty)");
  scene.validate();
  if (scene.rows != map.rows() || scene.cols != map.cols()) throw Error("run_tpi: scene dims differ from map");

  TpiResult out;
  auto t0 = std::chrono::steady_clock::now();

  // 1. superpixels on the landscape, template
  ScalarGrid signal = scene.landscape();
  if (params.ers_use_radiomap) {
    const Normalized norm = normalize(map, mask);
    for (int r = 0; r < map.rows(); ++r)
      for (int c = 0; c < map.cols(); ++c)
        if (mask.observed(r, c)) signal.set(r, c, signal(r, c) + norm.grid(r, c));
  }
  try {
    out.labeling = ers_segment(signal, params.ers);
  } catch (const Error& e) {
    throw Error(std::string("tpi/superpixels: ") + e.what());
  }
  out.templ = build_template(map, mask, out.labeling);
  out.template_mask = defined_mask(out.templ);
  out.stage_seconds.emplace_back("superpixels", seconds_since(t0));

  // 2. perturbation
  t0 = std::chrono::steady_clock::now();
  out.perturbation = build_perturbation(map, out.templ, mask);

  // 3. perturbation inpainting
  try {
    out.perturbation_filled =
        run_small_scale(out.perturbation, mask, scene, params.perturbation_method, params.perturbation);
  } catch (const Error& e) {
    throw Error(std::string("tpi/perturbation: ") + e.what());
  }
  out.stage_seconds.emplace_back("perturbation", seconds_since(t0));

  // 4. template inpainting
  t0 = std::chrono::steady_clock::now();
  try {
    out.depth = depth_map(scene, params.depth, &map, &mask, params.templ.exec);
    out.templ_filled = run_template(out.templ, out.template_mask, scene, out.depth.values,
                                    params.template_method, params.templ);
  } catch (const Error& e) {
    throw Error(std::string("tpi/template: ") + e.what());
  }
  out.stage_seconds.emplace_back("template", seconds_since(t0));

  // 5. combine; 6. smooth Omega only
  t0 = std::chrono::steady_clock::now();
  out.combined = ScalarGrid(map.rows(), map.cols(), map.units(), 0.0);
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c)
      out.combined.set(r, c,
                       mask.observed(r, c) ? map.at(r, c)
                                           : out.templ_filled.at(r, c) + out.perturbation_filled.at(r, c));
  out.estimate = params.smooth_passes > 0
                     ? giw_smooth(out.combined, mask, params.smooth_epsilon, params.smooth_passes,
                                  params.templ.exec)
                     : out.combined;
  out.stage_seconds.emplace_back("combine", seconds_since(t0));
  return out;
}

}  // namespace radiomap
