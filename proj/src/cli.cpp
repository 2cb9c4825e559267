#include "radiomap/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>

#include "CLI11.hpp"
#include "radiomap/io.hpp"
#include "radiomap/pipeline.hpp"
#include "radiomap/synth.hpp"

namespace radiomap {

namespace {

namespace fs = std::filesystem;

struct InpaintOptions {
  std::string map;
  std::string mask;
  std::string scene;
  std::string method = "tpi";
  std::string out;
  std::uint64_t seed = 1;
  bool serial = false;
  int patch_size = 21;
  int template_patch_size = 15;
  int stride = 0;
  int atoms = 500;
  int ksvd_iterations = 10;
  int sparsity = 10;
  int training_samples = 2000;
  double lambda = 0.05;
  double beta = 2.0;
  bool no_propagation_priority = false;
  std::vector<double> tx_weights;
  int m_top = 5;
  int superpixels = 0;
  bool ers_use_radiomap = false;
  int smooth_passes = 1;
  double smooth_epsilon = 0.05;
  std::string depth_model = "idw";
  double depth_sigma = 0.01;
  std::string perturbation_method = "epc";
  std::string template_method = "epc";
  int idw_neighbors = 32;
  double idw_power = 2.0;
  std::string rbf_kernel = "thin_plate";
  int rbf_centers = 2000;
  double rbf_scale = 8.0;
  std::string dictionary_in;
  std::string dictionary_out;
};

FillMethod fill_method(const std::string& s) { return s == "epd" ? FillMethod::epd : FillMethod::epc; }

MethodParams to_params(const InpaintOptions& o) {
  MethodParams p;
  DictionaryParams d;
  d.lambda = o.lambda;
  d.training_samples = o.training_samples;
  d.ksvd.atoms = o.atoms;
  d.ksvd.iterations = o.ksvd_iterations;
  d.ksvd.sparsity = o.sparsity;
  if (!o.dictionary_in.empty()) {
    d.pretrained = std::make_shared<const PatchDictionary>(read_dictionary(o.dictionary_in));
  }
  PropagationPriority prio;
  prio.beta = o.beta;
  prio.tx_weights = o.tx_weights;
  prio.enabled = !o.no_propagation_priority;

  p.small.patch_size = o.patch_size;
  p.small.stride = o.stride;
  p.small.priority = prio;
  p.small.dictionary = d;
  p.templ.patch_size = o.template_patch_size;
  p.templ.stride = o.stride;
  p.templ.m_top = o.m_top;
  p.templ.dictionary = d;
  p.depth.model = o.depth_model == "ldpl" ? DepthModel::ldpl : DepthModel::idw;
  p.depth.sigma = o.depth_sigma;

  p.tpi.ers.superpixels = o.superpixels;
  p.tpi.ers_use_radiomap = o.ers_use_radiomap;
  p.tpi.depth = p.depth;
  p.tpi.perturbation_method = fill_method(o.perturbation_method);
  p.tpi.perturbation = p.small;
  p.tpi.template_method = fill_method(o.template_method);
  p.tpi.templ = p.templ;
  p.tpi.smooth_passes = o.smooth_passes;
  p.tpi.smooth_epsilon = o.smooth_epsilon;
  if (d.pretrained && (d.pretrained->patch_size() != o.template_patch_size)) {
    // A pretrained dictionary only fits the stage with the matching patch size.
    p.templ.dictionary.pretrained.reset();
    p.tpi.templ.dictionary.pretrained.reset();
  }

  p.idw.neighbors = o.idw_neighbors;
  p.idw.power = o.idw_power;
  p.rbf.kernel = o.rbf_kernel == "gaussian" ? RbfKernel::gaussian : RbfKernel::thin_plate;
  p.rbf.centers_cap = o.rbf_centers;
  p.rbf.scale = o.rbf_scale;
  p.set_seed(o.seed);
  p.set_exec(o.serial ? Exec::serial : Exec::parallel);
  return p;
}

void echo_params(const InpaintOptions& o, std::ostream& out) {
  out << "method=" << o.method << " seed=" << o.seed << " exec=" << (o.serial ? "serial" : "parallel") << "\n";
  out << "patch_size=" << o.patch_size << " template_patch_size=" << o.template_patch_size
      << " stride=" << o.stride << " beta=" << o.beta
      << " propagation_priority=" << (o.no_propagation_priority ? "off" : "on") << "\n";
  out << "atoms=" << o.atoms << " ksvd_iterations=" << o.ksvd_iterations << " sparsity=" << o.sparsity
      << " training_samples=" << o.training_samples << " lambda=" << o.lambda << "\n";
  out << "m_top=" << o.m_top << " superpixels=" << o.superpixels << " depth_model=" << o.depth_model
      << " smooth_passes=" << o.smooth_passes << " smooth_epsilon=" << o.smooth_epsilon << "\n";
  out << "idw_neighbors=" << o.idw_neighbors << " idw_power=" << o.idw_power << " rbf_kernel=" << o.rbf_kernel
      << " rbf_centers=" << o.rbf_centers << "\n";
}

// Map values on Omega are ignored; every Phi cell must be defined.
ScalarGrid observed_map(const ScalarGrid& map, const RegionMask& mask) {
  require_same_shape(map, mask, "map vs mask");
  ScalarGrid out = map;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      if (mask.missing(r, c)) {
        out.clear(r, c);
      } else if (!map.defined(r, c)) {
        throw Error("map cell (" + std::to_string(r) + "," + std::to_string(c) + ") is NA but marked observed");
      }
    }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radiomap inpainting toolkit", "radiomap"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags override it)");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // generate
  std::string spec_path;
  std::string out_dir;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic scenario, scene file and masks");
  gen->add_option("spec", spec_path, "Scenario spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("out_dir", out_dir, "Output directory")->required();

  // inpaint
  InpaintOptions io;
  auto* inp = app.add_subcommand("inpaint", "Reconstruct the missing region of a radiomap");
  inp->add_option("map", io.map, "Radiomap (RMG1)")->required()->check(CLI::ExistingFile);
  inp->add_option("mask", io.mask, "Mask (RMG1, 1 = observed)")->required()->check(CLI::ExistingFile);
  inp->add_option("scene", io.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  inp->add_option("out", io.out, "Output radiomap (RMG1)")->required();
  inp->add_option("--method", io.method, "Method")
      ->check(CLI::IsMember({"epc", "epd", "ept", "tpi", "mbi", "idw", "rbf", "mean"}))
      ->capture_default_str();
  inp->add_option("--seed", io.seed, "Seed for every stochastic choice")->capture_default_str();
  inp->add_flag("--serial", io.serial, "Use the serial reference kernels");
  inp->add_option("--patch-size", io.patch_size, "Small-scale / perturbation patch size (odd)")->capture_default_str();
  inp->add_option("--template-patch-size", io.template_patch_size, "Template patch size (odd)")->capture_default_str();
  inp->add_option("--stride", io.stride, "Exemplar source stride (0 = auto)")->capture_default_str();
  inp->add_option("--atoms", io.atoms, "Dictionary atoms K")->capture_default_str();
  inp->add_option("--ksvd-iterations", io.ksvd_iterations, "K-SVD iterations")->capture_default_str();
  inp->add_option("--sparsity", io.sparsity, "K-SVD training sparsity T")->capture_default_str();
  inp->add_option("--training-samples", io.training_samples, "Dictionary training patches")->capture_default_str();
  inp->add_option("--lambda", io.lambda, "Lasso weight for EPD")->capture_default_str();
  inp->add_option("--beta", io.beta, "Distance decay exponent")->capture_default_str();
  inp->add_flag("--no-propagation-priority", io.no_propagation_priority, "Classic exemplar order (B*L = 1)");
  inp->add_option("--tx-weights", io.tx_weights, "Per-transmitter priority weights");
  inp->add_option("--m-top", io.m_top, "Template exemplars added to the dictionary")->capture_default_str();
  inp->add_option("--superpixels", io.superpixels, "ERS superpixel count (0 = cells/256)")->capture_default_str();
  inp->add_flag("--ers-use-radiomap", io.ers_use_radiomap, "Segment landscape plus observed values");
  inp->add_option("--smooth-passes", io.smooth_passes, "Smoothing passes on the missing region")->capture_default_str();
  inp->add_option("--smooth-epsilon", io.smooth_epsilon, "Smoothing epsilon (normalised units)")->capture_default_str();
  inp->add_option("--depth-model", io.depth_model, "Depth map decay model")
      ->check(CLI::IsMember({"idw", "ldpl"}))
      ->capture_default_str();
  inp->add_option("--depth-sigma", io.depth_sigma, "IDW depth exponent")->capture_default_str();
  inp->add_option("--perturbation-method", io.perturbation_method, "TPI perturbation fill")
      ->check(CLI::IsMember({"epc", "epd"}))
      ->capture_default_str();
  inp->add_option("--template-method", io.template_method, "TPI template fill")
      ->check(CLI::IsMember({"epc", "epd"}))
      ->capture_default_str();
  inp->add_option("--idw-neighbors", io.idw_neighbors, "IDW neighbours (0 = all)")->capture_default_str();
  inp->add_option("--idw-power", io.idw_power, "IDW power")->capture_default_str();
  inp->add_option("--rbf-kernel", io.rbf_kernel, "RBF kernel")
      ->check(CLI::IsMember({"thin_plate", "gaussian"}))
      ->capture_default_str();
  inp->add_option("--rbf-centers", io.rbf_centers, "RBF centre cap")->capture_default_str();
  inp->add_option("--rbf-scale", io.rbf_scale, "Gaussian RBF width in cells")->capture_default_str();
  inp->add_option("--dictionary", io.dictionary_in, "Pretrained dictionary (RMDL)")->check(CLI::ExistingFile);
  inp->add_option("--save-dictionary", io.dictionary_out, "Write the EPC/EPD training dictionary (RMDL)");

  // eval
  std::string truth_path, estimate_path, eval_mask_path;
  auto* ev = app.add_subcommand("eval", "Print MSE and NE over the missing region");
  ev->add_option("truth", truth_path, "Ground truth (RMG1)")->required()->check(CLI::ExistingFile);
  ev->add_option("estimate", estimate_path, "Estimate (RMG1)")->required()->check(CLI::ExistingFile);
  ev->add_option("mask", eval_mask_path, "Mask (RMG1)")->required()->check(CLI::ExistingFile);

  // bench
  std::string suite_path, csv_path;
  bool no_timing = false;
  bool bench_serial = false;
  auto* bench = app.add_subcommand("bench", "Run the seeded benchmark suite and write a CSV");
  bench->add_option("suite", suite_path, "Suite JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("out", csv_path, "Output CSV")->required();
  bench->add_flag("--no-timing", no_timing, "Write NA in the seconds column (byte-stable output)");
  bench->add_flag("--serial", bench_serial, "Use the serial reference kernels");

  // depthmap
  std::string dm_scene, dm_out, dm_map, dm_mask, dm_model = "idw", dm_pgm;
  double dm_sigma = 0.01;
  auto* dm = app.add_subcommand("depthmap", "Compute the radio depth map of a scene");
  dm->add_option("scene", dm_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  dm->add_option("out", dm_out, "Output grid (RMG1)")->required();
  dm->add_option("--model", dm_model, "Decay model")->check(CLI::IsMember({"idw", "ldpl"}))->capture_default_str();
  dm->add_option("--sigma", dm_sigma, "IDW exponent")->capture_default_str();
  dm->add_option("--map", dm_map, "Radiomap for LDPL fitting")->check(CLI::ExistingFile);
  dm->add_option("--mask", dm_mask, "Mask for LDPL fitting")->check(CLI::ExistingFile);
  dm->add_option("--pgm", dm_pgm, "Also render a PGM image");

  // superpixels
  std::string sp_scene, sp_out, sp_map, sp_mask, sp_template;
  int sp_k = 0;
  auto* sp = app.add_subcommand("superpixels", "ERS labelling of the scene landscape");
  sp->add_option("scene", sp_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  sp->add_option("out", sp_out, "Output labels (RMG1, unitless)")->required();
  sp->add_option("--k", sp_k, "Superpixel count (0 = cells/256)")->capture_default_str();
  sp->add_option("--map", sp_map, "Radiomap for the template")->check(CLI::ExistingFile);
  sp->add_option("--mask", sp_mask, "Mask for the template")->check(CLI::ExistingFile);
  sp->add_option("--template", sp_template, "Write the superpixel-mean template (needs --map and --mask)");

  // render
  std::string rd_in, rd_out;
  std::vector<double> rd_range;
  auto* rd = app.add_subcommand("render", "Render a grid as a binary PGM");
  rd->add_option("grid", rd_in, "Grid (RMG1)")->required()->check(CLI::ExistingFile);
  rd->add_option("out", rd_out, "Output PGM")->required();
  rd->add_option("--range", rd_range, "Fixed value range: lo hi")->expected(2);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (gen->parsed()) {
      const ScenarioSpec spec = read_scenario(spec_path);
      const Scenario s = generate(spec);
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      write_grid(s.truth, dir / "truth.rmg");
      write_scene(s.scene, dir / "scene.json");
      for (std::size_t i = 0; i < spec.holes.size(); ++i) {
        const RegionMask mask = make_mask(spec.rows, spec.cols, spec.holes[i]);
        const std::string tag = spec.holes.size() == 1 ? "" : "_" + std::to_string(i);
        write_mask(mask, dir / ("mask" + tag + ".rmg"));
        write_grid(observed_map(s.truth, mask), dir / ("observed" + tag + ".rmg"));
      }
      out << "wrote " << (dir / "truth.rmg").string() << ", " << (dir / "scene.json").string() << " and "
          << spec.holes.size() << " mask(s)\n";
      return 0;
    }
    if (inp->parsed()) {
      const ScalarGrid raw = read_grid(io.map);
      const RegionMask mask = read_mask(io.mask);
      const Scene scene = read_scene(io.scene);
      const ScalarGrid map = observed_map(raw, mask);
      const Method method = method_from_string(io.method);
      MethodParams params = to_params(io);
      echo_params(io, out);
      if (!io.dictionary_out.empty()) {
        if (params.small.dictionary.pretrained) throw Error("--save-dictionary with --dictionary is redundant");
        const Normalized norm = normalize(map, mask);
        const auto samples = sample_patches(norm.grid, mask, io.patch_size, io.training_samples, io.seed);
        KsvdParams kp = params.small.dictionary.ksvd;
        auto dict = std::make_shared<const PatchDictionary>(train_ksvd(samples, io.patch_size, kp));
        write_dictionary(*dict, io.dictionary_out);
        params.small.dictionary.pretrained = dict;
        params.tpi.perturbation.dictionary.pretrained = dict;
        out << "dictionary: " << io.dictionary_out << "\n";
      }
      const Reconstruction rec = reconstruct(method, map, mask, scene, params);
      write_grid(rec.estimate, io.out);
      for (const auto& [stage, secs] : rec.stage_seconds) out << "stage " << stage << " seconds=" << secs << "\n";
      out << "wrote " << io.out << " (" << mask.count_missing() << " cells filled)\n";
      return 0;
    }
    if (ev->parsed()) {
      const ScalarGrid truth = read_grid(truth_path);
      const ScalarGrid est = read_grid(estimate_path);
      const RegionMask mask = read_mask(eval_mask_path);
      out << "mse=" << format_number(mse(truth, est, mask)) << " ne=" << format_number(ne(truth, est, mask))
          << "\n";
      return 0;
    }
    if (bench->parsed()) {
      SuiteSpec spec = suite_from_json(read_text(suite_path));
      spec.params.set_exec(bench_serial ? Exec::serial : Exec::parallel);
      const auto rows = run_suite(spec);
      write_text(csv_path, suite_csv(rows, !no_timing));
      out << "wrote " << rows.size() << " rows to " << csv_path << "\n";
      return 0;
    }
    if (dm->parsed()) {
      const Scene scene = read_scene(dm_scene);
      DepthParams p;
      p.model = dm_model == "ldpl" ? DepthModel::ldpl : DepthModel::idw;
      p.sigma = dm_sigma;
      std::optional<ScalarGrid> map;
      std::optional<RegionMask> mask;
      if (!dm_map.empty() || !dm_mask.empty()) {
        if (dm_map.empty() || dm_mask.empty()) throw Error("--map and --mask go together");
        mask = read_mask(dm_mask);
        map = observed_map(read_grid(dm_map), *mask);
      }
      const DepthMap d = depth_map(scene, p, map ? &*map : nullptr, mask ? &*mask : nullptr);
      if (d.degenerate) err << "warning: depth field has zero span; depth map is all zeros\n";
      write_grid(d.values, dm_out);
      if (!dm_pgm.empty()) render_pgm(d.values, dm_pgm, Range{0.0, 1.0});
      out << "wrote " << dm_out << "\n";
      return 0;
    }
    if (sp->parsed()) {
      const Scene scene = read_scene(sp_scene);
      ErsParams p;
      p.superpixels = sp_k;
      const SuperpixelLabeling labels = ers_segment(scene.landscape(), p);
      write_grid(labeling_grid(labels), sp_out);
      if (!sp_template.empty()) {
        if (sp_map.empty() || sp_mask.empty()) throw Error("--template needs --map and --mask");
        const RegionMask mask = read_mask(sp_mask);
        write_grid(build_template(observed_map(read_grid(sp_map), mask), mask, labels), sp_template);
      }
      out << "wrote " << sp_out << " (" << labels.count << " superpixels)\n";
      return 0;
    }
    if (rd->parsed()) {
      const ScalarGrid g = read_grid(rd_in);
      std::optional<Range> range;
      if (!rd_range.empty()) range = Range{rd_range[0], rd_range[1]};
      render_pgm(g, rd_out, range);
      out << "wrote " << rd_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace radiomap
