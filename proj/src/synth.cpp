#include "radiomap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "radiomap/propagation.hpp"

namespace radiomap {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
  // (0, 1): never 0, so the log below is finite.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal for a (seed, counter) pair.
double counter_normal(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(counter));
  const std::uint64_t b = splitmix64(a);
  const double u1 = unit_open(a);
  const double u2 = unit_open(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (rows <= 0 || cols <= 0) throw Error("scenario: rows and cols must be positive");
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) throw Error("scenario: cell_size_m must be > 0");
  if (transmitters.empty()) throw Error("scenario: at least one transmitter required");
  for (const auto& b : buildings) {
    if (b.height <= 0 || b.width <= 0 || b.row < 0 || b.col < 0 || b.row + b.height > rows ||
        b.col + b.width > cols) {
      throw Error("scenario: building rectangle out of bounds");
    }
  }
  for (const auto& t : transmitters) {
    if (!(t.position.x >= 0.0 && t.position.x <= cols && t.position.y >= 0.0 && t.position.y <= rows)) {
      throw Error("scenario: transmitter outside the grid");
    }
    if (!std::isfinite(t.power_dbm)) throw Error("scenario: transmitter power must be finite");
    if (!(t.path_loss_exponent > 0.0) || !std::isfinite(t.path_loss_exponent)) {
      throw Error("scenario: path loss exponent must be > 0");
    }
    if (!(t.height_m >= 0.0) || !std::isfinite(t.height_m)) throw Error("scenario: antenna height must be >= 0");
  }
  if (!(wall_attenuation_db_per_m >= 0.0) || !std::isfinite(wall_attenuation_db_per_m)) {
    throw Error("scenario: wall attenuation must be >= 0");
  }
  if (shadowing.enabled) {
    if (!(shadowing.sigma_db >= 0.0) || !(shadowing.correlation_length_m >= 0.0)) {
      throw Error("scenario: shadowing sigma and correlation length must be >= 0");
    }
  }
}

ScalarGrid shadow_field(int rows, int cols, double cell_size_m, const ShadowingSpec& spec,
                        std::uint64_t seed) {
  ScalarGrid out(rows, cols, Units::dbm, 0.0);
  if (!spec.enabled || spec.sigma_db == 0.0) return out;
  // Smoothing white noise with a Gaussian of width s gives correlation
  // exp(-d^2 / 4s^2), which falls to 1/e at d = 2s.
  const double sigma_cells = 0.5 * spec.correlation_length_m / cell_size_m;
  const std::vector<double> kernel =
      sigma_cells > 0.0 ? gaussian_kernel(sigma_cells) : std::vector<double>{1.0};
  const int radius = static_cast<int>(kernel.size() / 2);
  const int prow = rows + 2 * radius;
  const int pcol = cols + 2 * radius;

  // White noise on a padded grid so the borders are as smooth as the inside.
  std::vector<double> noise(static_cast<std::size_t>(prow) * pcol);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < prow; ++r)
    for (int c = 0; c < pcol; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * pcol + c;
      noise[i] = counter_normal(seed, i);
    }

  std::vector<double> horiz(static_cast<std::size_t>(prow) * cols);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < prow; ++r)
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int k = 0; k <= 2 * radius; ++k) s += kernel[k] * noise[static_cast<std::size_t>(r) * pcol + c + k];
      horiz[static_cast<std::size_t>(r) * cols + c] = s;
    }
  std::vector<double> field(static_cast<std::size_t>(rows) * cols);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int k = 0; k <= 2 * radius; ++k) s += kernel[k] * horiz[static_cast<std::size_t>(r + k) * cols + c];
      field[static_cast<std::size_t>(r) * cols + c] = s;
    }

  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field) var += (v - mean) * (v - mean);
  var /= static_cast<double>(field.size());
  const double scale = var > 0.0 ? spec.sigma_db / std::sqrt(var) : 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.set(r, c, (field[static_cast<std::size_t>(r) * cols + c] - mean) * scale);
  return out;
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario out;
  out.scene = Scene(spec.rows, spec.cols, spec.cell_size_m);
  for (const auto& b : spec.buildings)
    for (int r = b.row; r < b.row + b.height; ++r)
      for (int c = b.col; c < b.col + b.width; ++c) out.scene.set_building(r, c, true);
  for (const auto& t : spec.transmitters) out.scene.transmitters.push_back({t.position, t.power_dbm, std::nullopt});
  out.scene.validate();

  const ScalarGrid shadow = shadow_field(spec.rows, spec.cols, spec.cell_size_m, spec.shadowing, spec.seed);
  out.truth = ScalarGrid(spec.rows, spec.cols, Units::dbm, 0.0);
  std::vector<double> values(static_cast<std::size_t>(spec.rows) * spec.cols);
  const Scene& scene = out.scene;

#pragma omp parallel for schedule(static)
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell p{r, c};
      double linear = 0.0;
      for (std::size_t i = 0; i < spec.transmitters.size(); ++i) {
        const TxSpec& t = spec.transmitters[i];
        const double d = std::max(std::hypot(tx_distance_m(scene, i, p), t.height_m), 0.5 * spec.cell_size_m);
        double loss_db = 10.0 * t.path_loss_exponent * std::log10(d);
        if (spec.wall_attenuation_db_per_m > 0.0) {
          double inside = 0.0;
          for (const auto& seg : traverse(scene, t.position, p).segments)
            if (scene.is_building(seg.cell.row, seg.cell.col)) inside += seg.length;
          loss_db += spec.wall_attenuation_db_per_m * inside * spec.cell_size_m;
        }
        linear += std::pow(10.0, (t.power_dbm - loss_db) / 10.0);
      }
      values[static_cast<std::size_t>(r) * spec.cols + c] = 10.0 * std::log10(linear) + shadow(r, c);
    }
  }
  for (int r = 0; r < spec.rows; ++r)
    for (int c = 0; c < spec.cols; ++c) out.truth.set(r, c, values[static_cast<std::size_t>(r) * spec.cols + c]);
  return out;
}

RegionMask make_mask(int rows, int cols, const Rect& hole) {
  if (rows <= 0 || cols <= 0) throw Error("make_mask: rows and cols must be positive");
  if (hole.height <= 0 || hole.width <= 0 || hole.row < 0 || hole.col < 0 || hole.row + hole.height > rows ||
      hole.col + hole.width > cols) {
    throw Error("make_mask: hole out of bounds");
  }
  if (hole.height == rows && hole.width == cols) throw Error("make_mask: hole covers the whole grid");
  RegionMask mask(rows, cols, true);
  for (int r = hole.row; r < hole.row + hole.height; ++r)
    for (int c = hole.col; c < hole.col + hole.width; ++c) mask.set_observed(r, c, false);
  return mask;
}

RegionMask make_mask(int rows, int cols, const RandomHoles& holes) {
  if (rows <= 0 || cols <= 0) throw Error("make_mask: rows and cols must be positive");
  if (holes.count <= 0 || holes.size <= 0) throw Error("make_mask: hole count and size must be positive");
  if (holes.size > rows || holes.size > cols) throw Error("make_mask: hole larger than the grid");
  RegionMask mask(rows, cols, true);
  std::mt19937_64 rng(holes.seed);
  std::uniform_int_distribution<int> pick_row(0, rows - holes.size);
  std::uniform_int_distribution<int> pick_col(0, cols - holes.size);
  int placed = 0;
  for (int attempt = 0; placed < holes.count && attempt < 1000 * holes.count; ++attempt) {
    const int r0 = pick_row(rng);
    const int c0 = pick_col(rng);
    bool free = true;
    for (int r = r0; r < r0 + holes.size && free; ++r)
      for (int c = c0; c < c0 + holes.size && free; ++c) free = mask.observed(r, c);
    if (!free) continue;
    for (int r = r0; r < r0 + holes.size; ++r)
      for (int c = c0; c < c0 + holes.size; ++c) mask.set_observed(r, c, false);
    ++placed;
  }
  if (placed < holes.count) throw Error("make_mask: could not place non-overlapping holes");
  if (mask.count_observed() == 0) throw Error("make_mask: holes cover the whole grid");
  return mask;
}

RegionMask make_mask(int rows, int cols, const HoleSpec& hole) {
  if (hole.rect.has_value() == hole.random.has_value()) throw Error("make_mask: give exactly one of rect/random");
  return hole.rect ? make_mask(rows, cols, *hole.rect) : make_mask(rows, cols, *hole.random);
}

ScenarioSpec suite_scenario(int rows, int cols, int transmitters, std::uint64_t seed) {
  if (rows < 32 || cols < 32) throw Error("suite_scenario: grid must be at least 32 x 32");
  if (transmitters <= 0) throw Error("suite_scenario: need at least one transmitter");
  ScenarioSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.cell_size_m = 2.0;
  spec.wall_attenuation_db_per_m = 1.0;
  spec.shadowing = {true, 20.0, 3.0};
  spec.seed = seed;

  std::mt19937_64 rng(splitmix64(seed));
  const int min_side = std::max(3, std::min(rows, cols) / 32);
  const int max_side = std::max(min_side + 1, std::min(rows, cols) / 9);
  std::uniform_int_distribution<int> side(min_side, max_side);
  const int count = std::max(1, rows * cols / 1200);
  for (int i = 0; i < count; ++i) {
    const int h = side(rng);
    const int w = side(rng);
    std::uniform_int_distribution<int> pr(0, rows - h);
    std::uniform_int_distribution<int> pc(0, cols - w);
    spec.buildings.push_back({pr(rng), pc(rng), h, w});
  }

  std::uniform_real_distribution<double> px(0.1 * cols, 0.9 * cols);
  std::uniform_real_distribution<double> py(0.1 * rows, 0.9 * rows);
  std::uniform_real_distribution<double> gamma(2.7, 3.3);
  const auto inside_building = [&](Point p) {
    for (const auto& b : spec.buildings)
      if (p.y >= b.row && p.y < b.row + b.height && p.x >= b.col && p.x < b.col + b.width) return true;
    return false;
  };
  for (int t = 0; t < transmitters; ++t) {
    Point p;
    do {
      p = {px(rng), py(rng)};
    } while (inside_building(p));
    spec.transmitters.push_back({p, 46.0, gamma(rng), 35.0});
  }
  return spec;
}

ScenarioSpec scenario_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("scenario json: ") + e.what());
  }
  try {
    ScenarioSpec spec;
    spec.rows = doc.at("rows").get<int>();
    spec.cols = doc.at("cols").get<int>();
    spec.cell_size_m = doc.value("cell_size_m", 1.0);
    for (const auto& b : doc.value("buildings", json::array())) {
      spec.buildings.push_back(
          {b.at("row").get<int>(), b.at("col").get<int>(), b.at("height").get<int>(), b.at("width").get<int>()});
    }
    for (const auto& t : doc.at("transmitters")) {
      spec.transmitters.push_back({{t.at("x").get<double>(), t.at("y").get<double>()},
                                   t.value("power_dbm", 46.0),
                                   t.value("path_loss_exponent", 3.0), t.value("height_m", 0.0)});
    }
    spec.wall_attenuation_db_per_m = doc.value("wall_attenuation_db_per_m", 0.0);
    if (doc.contains("shadowing")) {
      const auto& s = doc.at("shadowing");
      spec.shadowing.enabled = s.value("enabled", true);
      spec.shadowing.correlation_length_m = s.value("correlation_length_m", 20.0);
      spec.shadowing.sigma_db = s.value("sigma_db", 3.0);
    }
    spec.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& h : doc.value("holes", json::array())) {
      HoleSpec hole;
      if (h.contains("rect")) {
        const auto& r = h.at("rect");
        hole.rect = Rect{r.at("row").get<int>(), r.at("col").get<int>(), r.at("height").get<int>(),
                         r.at("width").get<int>()};
      }
      if (h.contains("random")) {
        const auto& r = h.at("random");
        hole.random = RandomHoles{r.value("count", 1), r.at("size").get<int>(), r.value("seed", spec.seed)};
      }
      spec.holes.push_back(hole);
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw Error(std::string("scenario json: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json doc;
  doc["rows"] = spec.rows;
  doc["cols"] = spec.cols;
  doc["cell_size_m"] = spec.cell_size_m;
  doc["buildings"] = json::array();
  for (const auto& b : spec.buildings)
    doc["buildings"].push_back({{"row", b.row}, {"col", b.col}, {"height", b.height}, {"width", b.width}});
  doc["transmitters"] = json::array();
  for (const auto& t : spec.transmitters) {
    doc["transmitters"].push_back({{"x", t.position.x},
                                   {"y", t.position.y},
                                   {"power_dbm", t.power_dbm},
                                   {"path_loss_exponent", t.path_loss_exponent},
                                   {"height_m", t.height_m}});
  }
  doc["wall_attenuation_db_per_m"] = spec.wall_attenuation_db_per_m;
  doc["shadowing"] = {{"enabled", spec.shadowing.enabled},
                      {"correlation_length_m", spec.shadowing.correlation_length_m},
                      {"sigma_db", spec.shadowing.sigma_db}};
  doc["seed"] = spec.seed;
  if (!spec.holes.empty()) {
    doc["holes"] = json::array();
    for (const auto& h : spec.holes) {
      json item = json::object();
      if (h.rect) {
        item["rect"] = {{"row", h.rect->row}, {"col", h.rect->col}, {"height", h.rect->height}, {"width", h.rect->width}};
      }
      if (h.random) item["random"] = {{"count", h.random->count}, {"size", h.random->size}, {"seed", h.random->seed}};
      doc["holes"].push_back(item);
    }
  }
  return doc.dump(2) + "\n";
}

ScenarioSpec read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace radiomap
