#include "radiomap/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace radiomap {

namespace {

using nlohmann::json;

struct Header {
  int rows = 0;
  int cols = 0;
  std::string tag;
};

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

// Splits into whitespace-separated tokens one line at a time.
class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  Header header() {
    std::string line;
    if (!std::getline(in_, line)) throw Error("grid file: empty input");
    ++line_no_;
    std::istringstream ls(line);
    std::string magic;
    Header h;
    std::string extra;
    if (!(ls >> magic >> h.rows >> h.cols >> h.tag) || magic != "RMG1" || (ls >> extra)) {
      throw Error("grid file: bad header (expected `RMG1 <rows> <cols> <units>`)");
    }
    if (h.rows <= 0 || h.cols <= 0) throw Error("grid file: rows and cols must be positive");
    return h;
  }

  std::vector<std::string> row(int cols) {
    std::string line;
    if (!std::getline(in_, line)) throw Error("grid file: missing row " + std::to_string(line_no_));
    ++line_no_;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (static_cast<int>(tokens.size()) != cols) {
      throw Error("grid file: line " + std::to_string(line_no_) + " has " + std::to_string(tokens.size()) +
                  " values, expected " + std::to_string(cols));
    }
    return tokens;
  }

  void finish() {
    std::string line;
    while (std::getline(in_, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) throw Error("grid file: trailing data");
    }
  }

  int line() const { return line_no_; }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

double parse_value(const std::string& tok, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error("grid file: malformed token '" + tok + "' on line " + std::to_string(line));
  }
  if (!std::isfinite(v)) throw Error("grid file: non-finite value on line " + std::to_string(line));
  return v;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string format_grid(const ScalarGrid& grid) {
  std::string out = "RMG1 " + std::to_string(grid.rows()) + " " + std::to_string(grid.cols()) + " " +
                    std::string(to_string(grid.units())) + "\n";
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (c > 0) out += ' ';
      if (grid.defined(r, c)) {
        append_double(out, grid(r, c));
      } else {
        out += "NA";
      }
    }
    out += '\n';
  }
  return out;
}

ScalarGrid parse_grid(const std::string& text) {
  Reader reader(text);
  const Header h = reader.header();
  if (h.tag == "mask") throw Error("grid file: this is a mask file");
  ScalarGrid grid = ScalarGrid::undefined(h.rows, h.cols, units_from_string(h.tag));
  for (int r = 0; r < h.rows; ++r) {
    const auto tokens = reader.row(h.cols);
    for (int c = 0; c < h.cols; ++c) {
      if (tokens[c] == "NA") continue;
      grid.set(r, c, parse_value(tokens[c], reader.line()));
    }
  }
  reader.finish();
  return grid;
}

void write_grid(const ScalarGrid& grid, const std::filesystem::path& path) { write_text(path, format_grid(grid)); }

ScalarGrid read_grid(const std::filesystem::path& path) {
  try {
    return parse_grid(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string format_mask(const RegionMask& mask) {
  std::string out = "RMG1 " + std::to_string(mask.rows()) + " " + std::to_string(mask.cols()) + " mask\n";
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (c > 0) out += ' ';
      out += mask.observed(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

RegionMask parse_mask(const std::string& text) {
  Reader reader(text);
  const Header h = reader.header();
  if (h.tag != "mask") throw Error("mask file: units tag must be `mask`");
  RegionMask mask(h.rows, h.cols, true);
  for (int r = 0; r < h.rows; ++r) {
    const auto tokens = reader.row(h.cols);
    for (int c = 0; c < h.cols; ++c) {
      if (tokens[c] == "1") continue;
      if (tokens[c] != "0") {
        throw Error("mask file: value '" + tokens[c] + "' on line " + std::to_string(reader.line()) +
                    " is not 0 or 1");
      }
      mask.set_observed(r, c, false);
    }
  }
  reader.finish();
  return mask;
}

void write_mask(const RegionMask& mask, const std::filesystem::path& path) { write_text(path, format_mask(mask)); }

RegionMask read_mask(const std::filesystem::path& path) {
  try {
    return parse_mask(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string encode_pgm(const ScalarGrid& grid, std::optional<Range> range) {
  Range rg;
  if (range) {
    rg = *range;
  } else {
    bool any = false;
    for (double v : grid.raw()) {
      if (ScalarGrid::is_sentinel(v)) continue;
      rg.lo = any ? std::min(rg.lo, v) : v;
      rg.hi = any ? std::max(rg.hi, v) : v;
      any = true;
    }
    if (!any) throw Error("render_pgm: grid has no defined cells");
  }
  if (!std::isfinite(rg.lo) || !std::isfinite(rg.hi) || !(rg.hi > rg.lo)) {
    throw Error("render_pgm: degenerate range [" + std::to_string(rg.lo) + ", " + std::to_string(rg.hi) + "]");
  }
  std::string out = "P5\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  for (double v : grid.raw()) {
    if (ScalarGrid::is_sentinel(v)) {
      out += static_cast<char>(0);
      continue;
    }
    const double t = std::clamp((v - rg.lo) / (rg.hi - rg.lo), 0.0, 1.0);
    out += static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0)));
  }
  return out;
}

void render_pgm(const ScalarGrid& grid, const std::filesystem::path& path, std::optional<Range> range) {
  write_text(path, encode_pgm(grid, range));
}

double mse(const ScalarGrid& truth, const ScalarGrid& estimate, const RegionMask& region) {
  require_same_shape(truth, region, "mse truth");
  require_same_shape(estimate, region, "mse estimate");
  double sum = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < region.rows(); ++r)
    for (int c = 0; c < region.cols(); ++c) {
      if (region.observed(r, c)) continue;
      const double d = truth.at(r, c) - estimate.at(r, c);
      sum += d * d;
      ++count;
    }
  if (count == 0) throw Error("mse: region has no missing cells");
  return sum / static_cast<double>(count);
}

double ne(const ScalarGrid& truth, const ScalarGrid& estimate, const RegionMask& region) {
  require_same_shape(truth, region, "ne truth");
  require_same_shape(estimate, region, "ne estimate");
  double num = 0.0;
  double den = 0.0;
  for (int r = 0; r < region.rows(); ++r)
    for (int c = 0; c < region.cols(); ++c) {
      if (region.observed(r, c)) continue;
      const double x = truth.at(r, c);
      const double d = x - estimate.at(r, c);
      num += d * d;
      den += x * x;
    }
  if (!(den > 0.0)) throw Error("ne: truth has zero energy over the region");
  return num / den;
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["rows"] = scene.rows;
  doc["cols"] = scene.cols;
  doc["cell_size_m"] = scene.cell_size_m;
  doc["buildings"] = json::array();
  for (int r = 0; r < scene.rows; ++r) {
    std::string line(static_cast<std::size_t>(scene.cols), '0');
    for (int c = 0; c < scene.cols; ++c)
      if (scene.is_building(r, c)) line[c] = '1';
    doc["buildings"].push_back(line);
  }
  doc["transmitters"] = json::array();
  for (const auto& t : scene.transmitters) {
    json item = {{"x", t.position.x}, {"y", t.position.y}, {"power_dbm", t.power_dbm}};
    if (t.ldpl) {
      item["theta"] = t.ldpl->theta;
      item["epsilon"] = t.ldpl->epsilon;
    }
    doc["transmitters"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    Scene scene(doc.at("rows").get<int>(), doc.at("cols").get<int>(), doc.value("cell_size_m", 1.0));
    if (doc.contains("buildings")) {
      const auto& rows = doc.at("buildings");
      if (static_cast<int>(rows.size()) != scene.rows) throw Error("scene json: building rows != rows");
      for (int r = 0; r < scene.rows; ++r) {
        const std::string line = rows[r].get<std::string>();
        if (static_cast<int>(line.size()) != scene.cols) throw Error("scene json: building row length != cols");
        for (int c = 0; c < scene.cols; ++c) {
          if (line[c] != '0' && line[c] != '1') throw Error("scene json: building cells must be '0' or '1'");
          scene.set_building(r, c, line[c] == '1');
        }
      }
    }
    for (const auto& t : doc.at("transmitters")) {
      Transmitter tx{{t.at("x").get<double>(), t.at("y").get<double>()}, t.value("power_dbm", 46.0), std::nullopt};
      if (t.contains("theta") || t.contains("epsilon")) {
        tx.ldpl = LdplParams{t.at("theta").get<double>(), t.at("epsilon").get<double>()};
      }
      scene.transmitters.push_back(tx);
    }
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw Error(std::string("scene json: ") + e.what());
  }
}

void write_scene(const Scene& scene, const std::filesystem::path& path) { write_text(path, scene_to_json(scene)); }

Scene read_scene(const std::filesystem::path& path) {
  try {
    return scene_from_json(read_text(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace radiomap
