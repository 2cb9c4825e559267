#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "radiomap/baselines.hpp"
#include "radiomap/inpaint.hpp"

namespace radiomap {

enum class Method { epc, epd, ept, tpi, mbi, idw, rbf, mean };

std::string_view to_string(Method method);
Method method_from_string(std::string_view text);

struct MethodParams {
  SmallScaleParams small;  // EPC / EPD
  TemplateParams templ;    // EPT on the whole map
  DepthParams depth;       // EPT depth map
  TpiParams tpi;
  IdwParams idw;
  RbfParams rbf;

  // Every stochastic choice (dictionary sampling, RBF centres) from one seed.
  void set_seed(std::uint64_t seed);
  void set_exec(Exec exec);
};

struct Reconstruction {
  ScalarGrid estimate;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

// Runs one method. Exemplar methods work on the Phi-min-max normalised map
// and are mapped back to the input units; Phi cells of the result are the
// input values bit for bit.
Reconstruction reconstruct(Method method, const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                           const MethodParams& params);

struct SuiteSpec {
  int rows = 128;
  int cols = 128;
  int transmitters = 3;
  std::vector<std::uint64_t> seeds;
  std::vector<int> sizes;  // square hole side lengths
  std::vector<Method> methods;
  MethodParams params;
};

struct SuiteRow {
  Method method = Method::mean;
  std::uint64_t seed = 0;
  int size = 0;
  double mse = 0.0;
  double ne = 0.0;
  double seconds = 0.0;
};

// Scenario for (seed) and hole for (seed, size) are shared by all methods.
ScalarGrid suite_truth(const SuiteSpec& spec, std::uint64_t seed, Scene* scene);
RegionMask suite_mask(const SuiteSpec& spec, std::uint64_t seed, int size);

// Rows ordered by seed, then size, then method as listed.
std::vector<SuiteRow> run_suite(const SuiteSpec& spec);

// `method,seed,size,mse,ne,seconds`; seconds are written as NA unless
// `timing` is set.
std::string suite_csv(const std::vector<SuiteRow>& rows, bool timing);

SuiteSpec suite_from_json(const std::string& text);

// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace radiomap
