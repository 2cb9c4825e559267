// Serial reference vs OpenMP kernels. Each benchmark takes the execution
// policy as its argument: 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "radiomap/baselines.hpp"
#include "radiomap/dictionary.hpp"
#include "radiomap/exemplar.hpp"
#include "radiomap/priority.hpp"
#include "radiomap/propagation.hpp"
#include "radiomap/synth.hpp"

using namespace radiomap;

namespace {

struct Fixture {
  Scenario scenario;
  RegionMask mask;
  ScalarGrid observed;
  Normalized normalized;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out{generate(suite_scenario(128, 128, 3, 1)), make_mask(128, 128, RandomHoles{1, 32, 1}), {}, {}};
    out.observed = out.scenario.truth;
    for (int r = 0; r < 128; ++r)
      for (int c = 0; c < 128; ++c)
        if (out.mask.missing(r, c)) out.observed.clear(r, c);
    out.normalized = normalize(out.observed, out.mask);
    return out;
  }();
  return f;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_epc_search(benchmark::State& state) {
  const Fixture& f = fixture();
  const SourceWindows windows = source_windows(f.mask, 21, 1);
  const Cell target = boundary(f.mask).front();
  for (auto _ : state)
    benchmark::DoNotOptimize(epc_search(f.normalized.grid, f.mask, target, 21, windows, exec_of(state)));
  label(state);
}

void BM_depth_map(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(depth_map(f.scenario.scene, {}, nullptr, nullptr, exec_of(state)));
  label(state);
}

void BM_score_front(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto front = boundary(f.mask);
  const ScalarGrid conf = initial_confidence(f.mask);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        score_front_small(f.scenario.scene, f.normalized.grid, f.mask, conf, front, 21, {}, exec_of(state)));
  label(state);
}

void BM_idw(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(idw_interp(f.observed, f.mask, {}, exec_of(state)));
  label(state);
}

void BM_ksvd(benchmark::State& state) {
  const Fixture& f = fixture();
  const Eigen::MatrixXd samples = sample_patches(f.normalized.grid, f.mask, 9, 1000, 1);
  KsvdParams p;
  p.atoms = 128;
  p.iterations = 2;
  p.sparsity = 6;
  p.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(train_ksvd(samples, 9, p));
  label(state);
}

}  // namespace

BENCHMARK(BM_epc_search)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_depth_map)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score_front)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_idw)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ksvd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
