#include "radiomap/dictionary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "radiomap/exemplar.hpp"

namespace radiomap {

namespace {

constexpr double kDuplicateDot = 1.0 - 1e-9;
constexpr std::uint32_t kDictionaryVersion = 1;

struct CodeEntry {
  int atom;
  double coef;
};
using Code = std::vector<CodeEntry>;

void check_atoms(const Eigen::MatrixXd& atoms) {
  if (atoms.cols() < 1) throw Error("dictionary needs at least one atom");
  for (Eigen::Index k = 0; k < atoms.cols(); ++k) {
    if (std::abs(atoms.col(k).norm() - 1.0) > 1e-9) throw Error("dictionary atom is not unit norm");
  }
}

bool duplicates_any(const Eigen::MatrixXd& atoms, Eigen::Index upto, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < upto; ++k)
    if (std::abs(atoms.col(k).dot(v)) >= kDuplicateDot) return true;
  return false;
}

Eigen::VectorXd residual_of(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& x, const Code& code) {
  Eigen::VectorXd r = x;
  for (const auto& e : code) r.noalias() -= e.coef * atoms.col(e.atom);
  return r;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes)) throw Error("dictionary blob truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

PatchDictionary::PatchDictionary(int patch_size, Eigen::MatrixXd atoms, KsvdReport report)
    : patch_size_(patch_size), atoms_(std::move(atoms)), report_(std::move(report)) {
  if (atoms_.rows() != static_cast<Eigen::Index>(patch_size) * patch_size) {
    throw Error("dictionary atom length must equal patch_size^2");
  }
  check_atoms(atoms_);
}

Eigen::MatrixXd sample_patches(const ScalarGrid& map, const RegionMask& mask, int n, int count,
                               std::uint64_t seed) {
  const SourceWindows windows = source_windows(mask, n, 1);
  if (windows.origins.empty()) throw Error("no fully observed window to sample patches from");
  std::vector<std::size_t> order(windows.origins.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(count), order.size());
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(take));
  for (std::size_t s = 0; s < take; ++s) {
    const Cell o = windows.origins[order[s]];
    for (int k = 0; k < n * n; ++k) samples(k, static_cast<Eigen::Index>(s)) = map.at(o.row + k / n, o.col + k % n);
  }
  return samples;
}

OmpCode omp_code(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& gram,
                 const Eigen::VectorXd& x, int sparsity) {
  OmpCode code;
  const Eigen::VectorXd alpha0 = atoms.transpose() * x;
  const double energy = x.squaredNorm();
  if (energy == 0.0) return code;
  Eigen::VectorXd alpha = alpha0;
  std::vector<char> chosen(static_cast<std::size_t>(atoms.cols()), 0);
  Eigen::VectorXd gamma;
  for (int t = 0; t < sparsity; ++t) {
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      if (chosen[k]) continue;
      if (std::abs(alpha(k)) > best_abs) {
        best_abs = std::abs(alpha(k));
        best = k;
      }
    }
    if (best < 0 || best_abs <= 1e-14 * std::sqrt(energy)) break;

    const auto s = static_cast<Eigen::Index>(code.support.size()) + 1;
    Eigen::MatrixXd g_ss(s, s);
    Eigen::VectorXd rhs(s);
    std::vector<int> support = code.support;
    support.push_back(static_cast<int>(best));
    for (Eigen::Index i = 0; i < s; ++i) {
      rhs(i) = alpha0(support[i]);
      for (Eigen::Index j = 0; j < s; ++j) g_ss(i, j) = gram(support[i], support[j]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g_ss);
    if (llt.info() != Eigen::Success) break;
    gamma = llt.solve(rhs);
    chosen[best] = 1;
    code.support = std::move(support);

    alpha = alpha0;
    for (Eigen::Index i = 0; i < s; ++i) alpha.noalias() -= gamma(i) * gram.col(code.support[i]);
    const double resid = energy - gamma.dot(rhs);
    if (resid <= 1e-14 * energy) break;
  }
  code.coef.assign(gamma.data(), gamma.data() + gamma.size());
  return code;
}

PatchDictionary train_ksvd(const Eigen::MatrixXd& samples, int patch_size, const KsvdParams& params) {
  const Eigen::Index dim = samples.rows();
  const Eigen::Index count = samples.cols();
  const Eigen::Index k_atoms = params.atoms;
  if (dim != static_cast<Eigen::Index>(patch_size) * patch_size) {
    throw Error("train_ksvd: sample length must equal patch_size^2");
  }
  if (k_atoms < 1) throw Error("train_ksvd: need at least one atom");
  if (count < k_atoms) throw Error("train_ksvd: fewer samples than atoms");
  if (params.sparsity < 1) throw Error("train_ksvd: sparsity must be >= 1");
  if (samples.squaredNorm() == 0.0) throw Error("train_ksvd: sample set has zero energy");

  // Initial atoms: distinct sample directions in seeded order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd atoms(dim, k_atoms);
  Eigen::Index filled = 0;
  for (Eigen::Index s : order) {
    if (filled == k_atoms) break;
    const double norm = samples.col(s).norm();
    if (norm == 0.0) continue;
    const Eigen::VectorXd v = samples.col(s) / norm;
    if (duplicates_any(atoms, filled, v)) continue;
    atoms.col(filled++) = v;
  }
  if (filled < k_atoms) throw Error("train_ksvd: fewer distinct sample directions than atoms");

  std::vector<Code> codes(static_cast<std::size_t>(count));
  Eigen::MatrixXd residual = samples;
  KsvdReport report;
  const bool parallel = params.exec == Exec::parallel;

  for (int iter = 0; iter <= params.iterations; ++iter) {
    // Sparse coding; keep the previous code when OMP does not improve it so
    // the objective cannot rise.
    const Eigen::MatrixXd gram = atoms.transpose() * atoms;
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (Eigen::Index s = 0; s < count; ++s) {
      const Eigen::VectorXd x = samples.col(s);
      const OmpCode omp = omp_code(atoms, gram, x, params.sparsity);
      Code fresh;
      for (std::size_t i = 0; i < omp.support.size(); ++i) fresh.push_back({omp.support[i], omp.coef[i]});
      const Eigen::VectorXd r_new = residual_of(atoms, x, fresh);
      const Eigen::VectorXd r_old = residual_of(atoms, x, codes[s]);
      if (iter == 0 || r_new.squaredNorm() < r_old.squaredNorm()) {
        codes[s] = std::move(fresh);
        residual.col(s) = r_new;
      } else {
        residual.col(s) = r_old;
      }
    }
    if (iter == 0) {
      report.objective.push_back(residual.squaredNorm());
      continue;
    }

    std::vector<std::vector<Eigen::Index>> users(static_cast<std::size_t>(k_atoms));
    for (Eigen::Index s = 0; s < count; ++s)
      for (const auto& e : codes[s]) users[e.atom].push_back(s);

    // Unused atoms take the worst-represented samples; their codes do not
    // touch these atoms, so the objective is unchanged.
    std::vector<Eigen::Index> by_error(static_cast<std::size_t>(count));
    std::iota(by_error.begin(), by_error.end(), 0);
    const Eigen::VectorXd err = residual.colwise().squaredNorm().transpose();
    std::stable_sort(by_error.begin(), by_error.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return err(a) > err(b); });
    std::size_t cursor = 0;
    for (Eigen::Index k = 0; k < k_atoms; ++k) {
      if (!users[k].empty()) continue;
      while (cursor < by_error.size()) {
        const Eigen::Index s = by_error[cursor++];
        const double norm = samples.col(s).norm();
        if (norm == 0.0) continue;
        const Eigen::VectorXd v = samples.col(s) / norm;
        bool dup = false;
        for (Eigen::Index j = 0; j < k_atoms && !dup; ++j)
          dup = j != k && std::abs(atoms.col(j).dot(v)) >= kDuplicateDot;
        if (dup) continue;
        atoms.col(k) = v;
        ++report.replaced_atoms;
        break;
      }
    }

    // Rank-1 updates over each atom's users.
    for (Eigen::Index k = 0; k < k_atoms; ++k) {
      const auto& idx = users[k];
      if (idx.empty()) continue;
      const auto u = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd e(dim, u);
      Eigen::VectorXd g_old(u);
      std::vector<std::size_t> slot(idx.size());
      for (Eigen::Index j = 0; j < u; ++j) {
        const auto& code = codes[idx[j]];
        for (std::size_t t = 0; t < code.size(); ++t)
          if (code[t].atom == k) slot[j] = t;
        g_old(j) = code[slot[j]].coef;
        e.col(j) = residual.col(idx[j]) + g_old(j) * atoms.col(k);
      }
      Eigen::VectorXd left;
      if (u <= dim) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.transpose() * e);
        const Eigen::VectorXd v = es.eigenvectors().col(u - 1);
        left = e * v;
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e * e.transpose());
        left = es.eigenvectors().col(dim - 1);
      }
      const double ln = left.norm();
      if (!(ln > 0.0)) continue;
      left /= ln;
      Eigen::VectorXd g = e.transpose() * left;
      if (g.sum() < 0.0) {
        left = -left;
        g = -g;
      }
      // Keep the old pair if rounding made the new one worse.
      const double old_err = (e - atoms.col(k) * g_old.transpose()).squaredNorm();
      const Eigen::MatrixXd fitted = e - left * g.transpose();
      if (fitted.squaredNorm() > old_err) continue;
      bool dup = false;
      for (Eigen::Index j = 0; j < k_atoms && !dup; ++j)
        dup = j != k && std::abs(atoms.col(j).dot(left)) >= kDuplicateDot;
      if (dup) continue;
      atoms.col(k) = left;
      for (Eigen::Index j = 0; j < u; ++j) {
        codes[idx[j]][slot[j]].coef = g(j);
        residual.col(idx[j]) = fitted.col(j);
      }
    }
    report.objective.push_back(residual.squaredNorm());
    report.iterations = iter;
  }
  return PatchDictionary(patch_size, std::move(atoms), std::move(report));
}

double masked_objective(const Eigen::MatrixXd& atoms, std::span<const double> x,
                        std::span<const std::uint8_t> observed, double lambda,
                        const Eigen::VectorXd& coef) {
  double data = 0.0;
  for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
    if (!observed[i]) continue;
    const double r = x[i] - atoms.row(i).dot(coef);
    data += r * r;
  }
  return 0.5 * data + lambda * coef.lpNorm<1>();
}

namespace {

struct ObservedSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd y;
};

// Observed rows of the atoms and patch. lambda_max and the solver share this
// so the threshold test is exact.
ObservedSystem observed_system(const Eigen::MatrixXd& atoms, std::span<const double> x,
                               std::span<const std::uint8_t> observed, const char* what) {
  if (x.size() != static_cast<std::size_t>(atoms.rows()) || observed.size() != x.size()) {
    throw Error(std::string(what) + ": patch length does not match atom length");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < atoms.rows(); ++i)
    if (observed[i]) rows.push_back(i);
  if (rows.empty()) throw Error(std::string(what) + ": no observed entries");
  const auto m = static_cast<Eigen::Index>(rows.size());
  ObservedSystem sys{Eigen::MatrixXd(m, atoms.cols()), Eigen::VectorXd(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    sys.a.row(i) = atoms.row(rows[i]);
    sys.y(i) = x[rows[i]];
  }
  return sys;
}

}  // namespace

double lambda_max(const Eigen::MatrixXd& atoms, std::span<const double> x,
                  std::span<const std::uint8_t> observed) {
  const ObservedSystem sys = observed_system(atoms, x, observed, "lambda_max");
  const Eigen::VectorXd corr = sys.a.transpose() * sys.y;
  return corr.cwiseAbs().maxCoeff();
}

SparseCode sparse_code_masked(const Eigen::MatrixXd& atoms, std::span<const double> x,
                              std::span<const std::uint8_t> observed, double lambda,
                              const LassoOptions& options) {
  if (lambda < 0.0) throw Error("sparse_code_masked: lambda must be >= 0");
  const ObservedSystem sys = observed_system(atoms, x, observed, "sparse_code_masked");
  const Eigen::MatrixXd& a_obs = sys.a;
  const Eigen::VectorXd& y = sys.y;
  const Eigen::Index k = atoms.cols();
  const Eigen::VectorXd corr = a_obs.transpose() * y;
  const Eigen::MatrixXd gram = a_obs.transpose() * a_obs;

  SparseCode out;
  out.coef = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(k);  // gram * coef
  const auto objective = [&]() {
    return 0.5 * (y - a_obs * out.coef).squaredNorm() + lambda * out.coef.lpNorm<1>();
  };
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double old = out.coef(j);
      const double rho = corr(j) - (q(j) - gjj * old);
      const double fresh = soft_threshold(rho, lambda) / gjj;
      if (fresh == old) continue;
      q.noalias() += (fresh - old) * gram.col(j);
      out.coef(j) = fresh;
      max_change = std::max(max_change, std::abs(fresh - old));
    }
    out.sweeps = sweep + 1;
    if (options.record_trace) out.trace.push_back(objective());
    if (max_change < options.tolerance) break;
  }
  out.nonzeros = static_cast<int>((out.coef.array() != 0.0).count());
  out.residual_norm = (y - a_obs * out.coef).norm();
  out.objective = objective();
  return out;
}

std::vector<double> epd_fill(const Eigen::MatrixXd& atoms, const Patch& patch, double lambda) {
  const std::size_t len = patch.values.size();
  if (static_cast<std::size_t>(atoms.rows()) != len) throw Error("epd_fill: atom length mismatch");
  std::vector<double> out(len, ScalarGrid::sentinel());
  bool any_missing = false;
  for (std::size_t k = 0; k < len; ++k) {
    if (patch.observed[k]) out[k] = patch.values[k];
    else if (patch.valid[k]) any_missing = true;
  }
  if (!any_missing) return out;
  if (patch.observed_count() == 0) throw Error("epd_fill: patch has no observed cells");
  std::vector<double> x(len, 0.0);
  for (std::size_t k = 0; k < len; ++k)
    if (patch.observed[k]) x[k] = patch.values[k];
  const SparseCode code = sparse_code_masked(atoms, x, patch.observed, lambda);
  for (std::size_t k = 0; k < len; ++k) {
    if (patch.valid[k] && !patch.observed[k]) {
      out[k] = atoms.row(static_cast<Eigen::Index>(k)).dot(code.coef);
    }
  }
  return out;
}

void write_dictionary(const PatchDictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write("RMDL", 4);
  put_u32(out, kDictionaryVersion);
  put_u32(out, static_cast<std::uint32_t>(dict.patch_size()));
  put_u32(out, static_cast<std::uint32_t>(dict.atom_count()));
  const auto& a = dict.atoms();
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    for (Eigen::Index i = 0; i < a.rows(); ++i) put_f64(out, a(i, k));
  if (!out) throw Error("failed writing " + path.string());
}

PatchDictionary read_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "RMDL", 4) != 0) throw Error("not an RMDL dictionary blob");
  const auto version = static_cast<std::uint32_t>(get_le(in, 4));
  if (version != kDictionaryVersion) throw Error("unsupported RMDL version " + std::to_string(version));
  const auto n = static_cast<int>(get_le(in, 4));
  const auto k = static_cast<Eigen::Index>(get_le(in, 4));
  if (n < 1 || k < 1) throw Error("RMDL header has empty dimensions");
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(n) * n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < atoms.rows(); ++i) atoms(i, j) = std::bit_cast<double>(get_le(in, 8));
  if (in.peek() != std::char_traits<char>::eof()) throw Error("RMDL blob has trailing bytes");
  return PatchDictionary(n, std::move(atoms));
}

}  // namespace radiomap
