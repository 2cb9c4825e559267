#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "radiomap/dictionary.hpp"
#include "radiomap/exemplar.hpp"
#include "radiomap/grid.hpp"
#include "radiomap/priority.hpp"
#include "radiomap/propagation.hpp"
#include "radiomap/superpixel.hpp"

namespace radiomap {

enum class FillMethod { epc, epd };

struct FillStep {
  PriorityRecord record;
  bool fallback = false;  // selected by confidence because every priority was 0
  int filled = 0;
};

struct FillLog {
  std::vector<FillStep> steps;
};

// Dictionary settings shared by the EPD paths.
struct DictionaryParams {
  double lambda = 0.05;
  int training_samples = 2000;
  KsvdParams ksvd;
  std::shared_ptr<const PatchDictionary> pretrained;  // skips training when set
};

struct SmallScaleParams {
  int patch_size = 21;
  int stride = 0;  // 0 = default_stride
  PropagationPriority priority;
  DictionaryParams dictionary;
  Exec exec = Exec::parallel;
};

// Exemplar inpainting with propagation priority (EPC/EPD). Returns a grid
// defined everywhere whose Phi cells equal the input.
ScalarGrid run_small_scale(const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                           FillMethod method, const SmallScaleParams& params, FillLog* log = nullptr);

struct TemplateParams {
  int patch_size = 15;
  int stride = 0;
  TemplateWeights weights;
  int m_top = 5;
  DictionaryParams dictionary;
  Exec exec = Exec::parallel;
};

// Depth-guided exemplar inpainting (EPT) with C*D*V priority and SIM-ranked
// exemplars.
ScalarGrid run_template(const ScalarGrid& templ, const RegionMask& mask, const Scene& scene,
                        const ScalarGrid& depth, FillMethod method, const TemplateParams& params,
                        FillLog* log = nullptr);

// Gradient-inverse-weighted smoothing of the Omega cells of `region`.
ScalarGrid giw_smooth(const ScalarGrid& grid, const RegionMask& region, double epsilon, int passes,
                      Exec exec = Exec::parallel);

struct TpiParams {
  ErsParams ers;
  bool ers_use_radiomap = false;  // add observed values to the landscape signal
  DepthParams depth;
  FillMethod perturbation_method = FillMethod::epc;
  SmallScaleParams perturbation;
  FillMethod template_method = FillMethod::epc;
  TemplateParams templ;
  double smooth_epsilon = 0.05;
  int smooth_passes = 1;
};

struct TpiResult {
  ScalarGrid estimate;
  SuperpixelLabeling labeling;
  DepthMap depth;
  ScalarGrid templ;                // before inpainting
  ScalarGrid perturbation;         // before inpainting
  ScalarGrid templ_filled;
  ScalarGrid perturbation_filled;
  RegionMask template_mask;        // Phi of the template stage
  ScalarGrid combined;             // t~ + h~ before smoothing
  std::vector<std::pair<std::string, double>> stage_seconds;
};

// Template-perturbation inpainting.
TpiResult run_tpi(const ScalarGrid& map, const RegionMask& mask, const Scene& scene,
                  const TpiParams& params);

}  // namespace radiomap
