#include "radiomap/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>

namespace radiomap {

namespace {

std::uint64_t mix_bits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double plogp(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

struct Edge {
  int a;
  int b;
  double w;
};

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  int size(int root) const { return size_[root]; }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace

int default_superpixel_count(int rows, int cols) { return std::max(1, rows * cols / 256); }

SuperpixelLabeling ers_segment(const ScalarGrid& signal, const ErsParams& params, ErsTrace* trace) {
  const int rows = signal.rows();
  const int cols = signal.cols();
  const int nodes = rows * cols;
  const int k_target = params.superpixels > 0 ? params.superpixels : default_superpixel_count(rows, cols);
  if (k_target > nodes) throw Error("ers_segment: more superpixels than cells");
  for (double v : signal.raw())
    if (ScalarGrid::is_sentinel(v)) throw Error("ers_segment: signal has undefined cells");

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * nodes));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) edges.push_back({i, i + 1, 0.0});
      if (r + 1 < rows) edges.push_back({i, i + cols, 0.0});
    }
  }

  double h = 1.0;
  if (params.bandwidth) {
    h = *params.bandwidth;
    if (!(h > 0.0)) throw Error("ers_segment: bandwidth must be > 0");
  } else if (!edges.empty()) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& e : edges) {
      const double d = std::abs(signal.raw()[e.a] - signal.raw()[e.b]);
      sum += d;
      sum2 += d * d;
    }
    const double m = static_cast<double>(edges.size());
    const double var = sum2 / m - (sum / m) * (sum / m);
    if (var > 0.0) h = std::sqrt(var);
  }
  for (auto& e : edges) {
    const double d = signal.raw()[e.a] - signal.raw()[e.b];
    e.w = std::exp(-(d * d) / (h * h));
  }

  // Node weight w_i and the self-loop mass that unselected edges leave behind.
  std::vector<double> total(static_cast<std::size_t>(nodes), 0.0);
  for (const auto& e : edges) {
    total[e.a] += e.w;
    total[e.b] += e.w;
  }
  std::vector<double> loop = total;
  const double mass = std::accumulate(total.begin(), total.end(), 0.0);

  DisjointSets sets(nodes);
  const double n = static_cast<double>(nodes);

  const auto entropy_gain = [&](const Edge& e) {
    if (mass <= 0.0 || e.w <= 0.0) return 0.0;
    const auto node_gain = [&](int i) {
      const double wi = total[i];
      if (wi <= 0.0) return 0.0;
      const double s = loop[i];
      const double rest = std::max(s - e.w, 0.0);
      return wi * (plogp(e.w / wi) + plogp(rest / wi) - plogp(s / wi));
    };
    return (node_gain(e.a) + node_gain(e.b)) / mass;
  };
  const auto balance_gain = [&](int size_a, int size_b) {
    return 1.0 + plogp((size_a + size_b) / n) - plogp(size_a / n) - plogp(size_b / n);
  };

  double alpha = 0.0;
  if (params.alpha) {
    alpha = *params.alpha;
  } else if (!edges.empty()) {
    double max_h = 0.0;
    for (const auto& e : edges) max_h = std::max(max_h, entropy_gain(e));
    const double max_b = balance_gain(1, 1);
    alpha = max_b > 0.0 ? params.balance * static_cast<double>(k_target) * (max_h / max_b) : 0.0;
  }

  // Equal gains are common on flat signals; ordering them by a fixed hash of
  // the edge index keeps flat areas from merging in scanline stripes.
  std::vector<std::uint64_t> tie(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) tie[i] = mix_bits(i);
  using Entry = std::pair<double, int>;  // gain, edge index
  const auto cmp = [&tie](const Entry& x, const Entry& y) {
    return x.first < y.first || (x.first == y.first && tie[x.second] > tie[y.second]);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  const auto gain_of = [&](int idx) {
    const Edge& e = edges[idx];
    const int ra = sets.find(e.a);
    const int rb = sets.find(e.b);
    return entropy_gain(e) + alpha * balance_gain(sets.size(ra), sets.size(rb));
  };
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) heap.push({gain_of(i), i});

  double objective = alpha * (std::log(n) - n);
  if (trace) {
    trace->alpha = alpha;
    trace->bandwidth = h;
    trace->initial_objective = objective;
    trace->objective.clear();
    trace->accepted.clear();
  }

  int components = nodes;
  while (components > k_target && !heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    const Edge& e = edges[top.second];
    if (sets.find(e.a) == sets.find(e.b)) continue;
    const double fresh = gain_of(top.second);
    if (!heap.empty() && cmp(Entry{fresh, top.second}, heap.top())) {
      heap.push({fresh, top.second});
      continue;
    }
    loop[e.a] = std::max(loop[e.a] - e.w, 0.0);
    loop[e.b] = std::max(loop[e.b] - e.w, 0.0);
    sets.unite(e.a, e.b);
    --components;
    objective += fresh;
    if (trace) {
      trace->objective.push_back(objective);
      trace->accepted.push_back({e.a, e.b});
    }
  }

  SuperpixelLabeling out;
  out.rows = rows;
  out.cols = cols;
  out.labels.assign(static_cast<std::size_t>(nodes), -1);
  std::vector<int> root_label(static_cast<std::size_t>(nodes), -1);
  for (int i = 0; i < nodes; ++i) {
    const int root = sets.find(i);
    if (root_label[root] < 0) root_label[root] = out.count++;
    out.labels[i] = root_label[root];
  }
  return out;
}

ScalarGrid build_template(const ScalarGrid& radiomap, const RegionMask& mask,
                          const SuperpixelLabeling& labeling) {
  require_same_shape(radiomap, mask, "build_template");
  if (labeling.rows != radiomap.rows() || labeling.cols != radiomap.cols()) {
    throw Error("build_template: labeling dimensions differ from the radiomap");
  }
  std::vector<double> sum(static_cast<std::size_t>(labeling.count), 0.0);
  std::vector<int> count(static_cast<std::size_t>(labeling.count), 0);
  for (int r = 0; r < radiomap.rows(); ++r) {
    for (int c = 0; c < radiomap.cols(); ++c) {
      if (!mask.observed(r, c)) continue;
      const int l = labeling.at(r, c);
      sum[l] += radiomap.at(r, c);
      ++count[l];
    }
  }
  ScalarGrid t = ScalarGrid::undefined(radiomap.rows(), radiomap.cols(), radiomap.units());
  for (int r = 0; r < radiomap.rows(); ++r) {
    for (int c = 0; c < radiomap.cols(); ++c) {
      const int l = labeling.at(r, c);
      if (count[l] > 0) t.set(r, c, sum[l] / count[l]);
    }
  }
  return t;
}

ScalarGrid build_perturbation(const ScalarGrid& radiomap, const ScalarGrid& templ,
                              const RegionMask& mask) {
  require_same_shape(radiomap, mask, "build_perturbation");
  require_same_shape(templ, mask, "build_perturbation");
  ScalarGrid h = ScalarGrid::undefined(radiomap.rows(), radiomap.cols(), radiomap.units());
  for (int r = 0; r < radiomap.rows(); ++r)
    for (int c = 0; c < radiomap.cols(); ++c)
      if (mask.observed(r, c)) h.set(r, c, radiomap.at(r, c) - templ.at(r, c));
  return h;
}

RegionMask defined_mask(const ScalarGrid& grid) {
  RegionMask mask(grid.rows(), grid.cols(), false);
  for (int r = 0; r < grid.rows(); ++r)
    for (int c = 0; c < grid.cols(); ++c) mask.set_observed(r, c, grid.defined(r, c));
  return mask;
}

ScalarGrid labeling_grid(const SuperpixelLabeling& labeling) {
  ScalarGrid g(labeling.rows, labeling.cols, Units::unitless, 0.0);
  for (int r = 0; r < labeling.rows; ++r)
    for (int c = 0; c < labeling.cols; ++c) g.set(r, c, labeling.at(r, c));
  return g;
}

}  // namespace radiomap
