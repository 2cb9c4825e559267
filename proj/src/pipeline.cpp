#include "radiomap/pipeline.hpp"

#include <charconv>
#include <chrono>

#include "json.hpp"
#include "radiomap/io.hpp"
#include "radiomap/synth.hpp"

namespace radiomap {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

ScalarGrid restore_observed(const ScalarGrid& estimate, const ScalarGrid& map, const RegionMask& mask) {
  ScalarGrid out = estimate;
  out.set_units(map.units());
  for (int r = 0; r < map.rows(); ++r)
    for (int c = 0; c < map.cols(); ++c)
      if (mask.observed(r, c)) out.set(r, c, map.at(r, c));
  return out;
}

void apply_params(MethodParams& p, const json& j) {
  const auto get_int = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = j.at(key).get<int>();
  };
  const auto get_double = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  int patch = p.small.patch_size;
  get_int("patch_size", patch);
  p.small.patch_size = patch;
  p.tpi.perturbation.patch_size = patch;
  int tpatch = p.templ.patch_size;
  get_int("template_patch_size", tpatch);
  p.templ.patch_size = tpatch;
  p.tpi.templ.patch_size = tpatch;
  int stride = p.small.stride;
  get_int("stride", stride);
  p.small.stride = p.templ.stride = p.tpi.perturbation.stride = p.tpi.templ.stride = stride;

  DictionaryParams d = p.small.dictionary;
  get_int("atoms", d.ksvd.atoms);
  get_int("ksvd_iterations", d.ksvd.iterations);
  get_int("sparsity", d.ksvd.sparsity);
  get_int("training_samples", d.training_samples);
  get_double("lambda", d.lambda);
  p.small.dictionary = p.templ.dictionary = p.tpi.perturbation.dictionary = p.tpi.templ.dictionary = d;

  double beta = p.small.priority.beta;
  get_double("beta", beta);
  p.small.priority.beta = p.tpi.perturbation.priority.beta = beta;
  if (j.contains("propagation_priority")) {
    const bool on = j.at("propagation_priority").get<bool>();
    p.small.priority.enabled = p.tpi.perturbation.priority.enabled = on;
  }
  int m_top = p.templ.m_top;
  get_int("m_top", m_top);
  p.templ.m_top = p.tpi.templ.m_top = m_top;
  get_int("superpixels", p.tpi.ers.superpixels);
  get_int("smooth_passes", p.tpi.smooth_passes);
  get_double("smooth_epsilon", p.tpi.smooth_epsilon);
  if (j.contains("depth_model")) {
    const std::string m = j.at("depth_model").get<std::string>();
    if (m != "idw" && m != "ldpl") throw Error("suite json: depth_model must be idw or ldpl");
    p.depth.model = p.tpi.depth.model = m == "idw" ? DepthModel::idw : DepthModel::ldpl;
  }
  if (j.contains("perturbation_method")) {
    p.tpi.perturbation_method = j.at("perturbation_method").get<std::string>() == "epd" ? FillMethod::epd : FillMethod::epc;
  }
  if (j.contains("template_method")) {
    p.tpi.template_method = j.at("template_method").get<std::string>() == "epd" ? FillMethod::epd : FillMethod::epc;
  }
  get_int("idw_neighbors", p.idw.neighbors);
  get_double("idw_power", p.idw.power);
  get_int("rbf_centers", p.rbf.centers_cap);
  if (j.contains("rbf_kernel")) {
    const std::string k = j.at("rbf_kernel").get<std::string>();
    if (k != "thin_plate" && k != "gaussian") throw Error("suite json: rbf_kernel must be thin_plate or gaussian");
    p.rbf.kernel = k == "gaussian" ? RbfKernel::gaussian : RbfKernel::thin_plate;
  }
  get_double("rbf_scale", p.rbf.scale);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::epc: return "epc";
    case Method::epd: return "epd";
    case Method::ept: return "ept";
    case Method::tpi: return "tpi";
    case Method::mbi: return "mbi";
    case Method::idw: return "idw";
    case Method::rbf: return "rbf";
    case Method::mean: return "mean";
  }
  return "?";
}

Method method_from_string(std::string_view text) {
  for (Method m : {Method::epc, Method::epd, Method::ept, Method::tpi, Method::mbi, Method::idw, Method::rbf,
                   Method::mean}) {
    if (to_string(m) == text) return m;
  }
  throw Error("unknown method '" + std::string(text) + "' (epc, epd, ept, tpi, mbi, idw, rbf, mean)");
}

void MethodParams::set_seed(std::uint64_t seed) {
  small.dictionary.ksvd.seed = seed;
  templ.dictionary.ksvd.seed = seed;
  tpi.perturbation.dictionary.ksvd.seed = seed;
  tpi.templ.dictionary.ksvd.seed = seed;
  rbf.seed = seed;
}

void MethodParams::set_exec(Exec exec) {
  small.exec = exec;
  small.dictionary.ksvd.exec = exec;
  templ.exec = exec;
  templ.dictionary.ksvd.exec = exec;
  tpi.perturbation.exec = exec;
  tpi.perturbation.dictionary.ksvd.exec = exec;
  tpi.templ.exec = exec;
  tpi.templ.dictionary.ksvd.exec = exec;
}

Reconstruction reconstruct(Method method, const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                           const MethodParams& params) {
  require_same_shape(map, mask, "reconstruct");
  if (scene.rows != map.rows() || scene.cols != map.cols()) throw Error("scene dimensions differ from the map");
  Reconstruction out;
  const auto t0 = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  switch (method) {
    case Method::mean: out.estimate = mean_fill(map, mask); break;
    case Method::idw: out.estimate = idw_interp(map, mask, params.idw, params.small.exec); break;
    case Method::rbf: out.estimate = rbf_interp(map, mask, params.rbf, params.small.exec); break;
    case Method::mbi: out.estimate = mbi(map, mask, scene); break;
    case Method::epc:
    case Method::epd:
    case Method::ept:
    case Method::tpi: {
      const Normalized norm = normalize(map, mask);
      ScalarGrid filled;
      if (method == Method::tpi) {
        TpiResult res = run_tpi(norm.grid, mask, scene, params.tpi);
        filled = std::move(res.estimate);
        out.stage_seconds = std::move(res.stage_seconds);
      } else if (method == Method::ept) {
        const DepthMap depth = depth_map(scene, params.depth, &map, &mask, params.templ.exec);
        filled = run_template(norm.grid, mask, scene, depth.values, FillMethod::epc, params.templ);
      } else {
        filled = run_small_scale(norm.grid, mask, scene, method == Method::epc ? FillMethod::epc : FillMethod::epd,
                                 params.small);
      }
      out.estimate = restore_observed(denormalize(filled, norm.params, map.units()), map, mask);
      break;
    }
  }
  out.stage_seconds.emplace_back("total", elapsed());
  return out;
}

ScalarGrid suite_truth(const SuiteSpec& spec, std::uint64_t seed, Scene* scene) {
  Scenario s = generate(suite_scenario(spec.rows, spec.cols, spec.transmitters, seed));
  if (scene) *scene = std::move(s.scene);
  return s.truth;
}

RegionMask suite_mask(const SuiteSpec& spec, std::uint64_t seed, int size) {
  return make_mask(spec.rows, spec.cols,
                   RandomHoles{1, size, seed * 7919ULL + static_cast<std::uint64_t>(size)});
}

std::vector<SuiteRow> run_suite(const SuiteSpec& spec) {
  if (spec.seeds.empty() || spec.sizes.empty() || spec.methods.empty()) {
    throw Error("suite: seeds, sizes and methods must be non-empty");
  }
  std::vector<SuiteRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    Scene scene;
    const ScalarGrid truth = suite_truth(spec, seed, &scene);
    for (int size : spec.sizes) {
      const RegionMask mask = suite_mask(spec, seed, size);
      ScalarGrid observed = truth;
      for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
          if (mask.missing(r, c)) observed.clear(r, c);
      for (Method m : spec.methods) {
        MethodParams params = spec.params;
        params.set_seed(seed);
        const auto t0 = Clock::now();
        Reconstruction rec;
        try {
          rec = reconstruct(m, observed, mask, scene, params);
        } catch (const Error& e) {
          throw Error("suite seed " + std::to_string(seed) + " size " + std::to_string(size) + " method " +
                      std::string(to_string(m)) + ": " + e.what());
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        rows.push_back({m, seed, size, mse(truth, rec.estimate, mask), ne(truth, rec.estimate, mask), secs});
      }
    }
  }
  return rows;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string suite_csv(const std::vector<SuiteRow>& rows, bool timing) {
  std::string out = "method,seed,size,mse,ne,seconds\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.method)) + "," + std::to_string(r.seed) + "," + std::to_string(r.size) + "," +
           format_number(r.mse) + "," + format_number(r.ne) + "," + (timing ? format_number(r.seconds) : "NA") +
           "\n";
  }
  return out;
}

SuiteSpec suite_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    SuiteSpec spec;
    spec.rows = doc.value("rows", spec.rows);
    spec.cols = doc.value("cols", spec.cols);
    spec.transmitters = doc.value("transmitters", spec.transmitters);
    if (doc.contains("seeds")) {
      spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const int n = doc.value("num_seeds", 20);
      const std::uint64_t first = doc.value("first_seed", std::uint64_t{1});
      for (int i = 0; i < n; ++i) spec.seeds.push_back(first + static_cast<std::uint64_t>(i));
    }
    spec.sizes = doc.value("sizes", std::vector<int>{20, 30, 40, 60});
    for (const auto& m : doc.value("methods", std::vector<std::string>{"tpi", "epc", "epd", "mbi", "idw", "rbf", "mean"}))
      spec.methods.push_back(method_from_string(m));
    if (doc.contains("params")) apply_params(spec.params, doc.at("params"));
    return spec;
  } catch (const json::exception& e) {
    throw Error(std::string("suite json: ") + e.what());
  }
}

}  // namespace radiomap
