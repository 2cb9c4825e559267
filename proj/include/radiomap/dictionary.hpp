#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "radiomap/exec.hpp"
#include "radiomap/grid.hpp"

namespace radiomap {

struct KsvdParams {
  int atoms = 500;
  int iterations = 10;
  int sparsity = 10;  // OMP nonzeros per sample
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

struct KsvdReport {
  int iterations = 0;
  // Sum of squared residuals after the initial coding pass, then after each
  // iteration. Non-increasing up to rounding.
  std::vector<double> objective;
  std::size_t replaced_atoms = 0;
};

// K unit-norm atoms of length n^2, stored as the columns of `atoms()`.
class PatchDictionary {
 public:
  PatchDictionary(int patch_size, Eigen::MatrixXd atoms, KsvdReport report = {});

  int patch_size() const { return patch_size_; }
  int atom_length() const { return static_cast<int>(atoms_.rows()); }
  int atom_count() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const KsvdReport& report() const { return report_; }

 private:
  int patch_size_;
  Eigen::MatrixXd atoms_;
  KsvdReport report_;
};

// `count` fully observed n x n patches as columns, drawn without replacement
// (seeded) from the fully observed windows of `mask`.
Eigen::MatrixXd sample_patches(const ScalarGrid& map, const RegionMask& mask, int n, int count,
                               std::uint64_t seed);

// K-SVD: batch OMP coding alternating with rank-1 atom updates.
PatchDictionary train_ksvd(const Eigen::MatrixXd& samples, int patch_size, const KsvdParams& params);

struct OmpCode {
  std::vector<int> support;
  std::vector<double> coef;
};

// Greedy orthogonal matching pursuit against unit-norm atoms.
OmpCode omp_code(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& gram,
                 const Eigen::VectorXd& x, int sparsity);

struct LassoOptions {
  int max_sweeps = 500;
  double tolerance = 1e-8;  // max coefficient change per sweep
  bool record_trace = false;
};

struct SparseCode {
  Eigen::VectorXd coef;
  int nonzeros = 0;
  double residual_norm = 0.0;  // over observed rows
  double objective = 0.0;
  int sweeps = 0;
  std::vector<double> trace;  // objective after each sweep, when recorded
};

// 0.5 * ||x_obs - A_obs b||^2 + lambda * ||b||_1.
double masked_objective(const Eigen::MatrixXd& atoms, std::span<const double> x,
                        std::span<const std::uint8_t> observed, double lambda,
                        const Eigen::VectorXd& coef);

// max_j |A_obs^T x_obs|: the smallest lambda whose solution is exactly 0.
double lambda_max(const Eigen::MatrixXd& atoms, std::span<const double> x,
                  std::span<const std::uint8_t> observed);

// Coordinate-descent lasso on the observed rows of `atoms`. Columns are not
// renormalised after row restriction.
SparseCode sparse_code_masked(const Eigen::MatrixXd& atoms, std::span<const double> x,
                              std::span<const std::uint8_t> observed, double lambda,
                              const LassoOptions& options = {});

// Observed cells kept verbatim; missing in-bounds cells set to (A b)_i.
std::vector<double> epd_fill(const Eigen::MatrixXd& atoms, const Patch& patch, double lambda);

// Binary blob: "RMDL", u32 version, u32 n, u32 K, then K atoms of n^2
// little-endian f64 each.
void write_dictionary(const PatchDictionary& dict, const std::filesystem::path& path);
PatchDictionary read_dictionary(const std::filesystem::path& path);

}  // namespace radiomap
