#include <benchmark/benchmark.h>

#include "afrelay/composite_spectrum.hpp"
#include "afrelay/metrics.hpp"
#include "afrelay/montecarlo.hpp"

using namespace afrelay;

namespace {

const SystemParams kRef{10, 10, 10.0, 10.0};

void BM_KDensity(benchmark::State& st) {
  DensityGridSpec spec;
  spec.workers = 1;
  const CompositeSpectrumParams p{1.0, 100.0, zeta_from_db(double(st.range(0)))};
  for (auto _ : st) benchmark::DoNotOptimize(k_density(p, spec));
}
BENCHMARK(BM_KDensity)->Arg(0)->Arg(20)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_KDensityAt(benchmark::State& st) {
  const CompositeSpectrumParams p{1.0, 100.0, 10.0};
  double x = 5.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(k_density_at(x, p));
    x = x < 300 ? x * 1.01 : 5.0;
  }
}
BENCHMARK(BM_KDensityAt);

void BM_Capacity(benchmark::State& st) {
  const TslParams m{zeta_from_db(double(st.range(0)))};
  for (auto _ : st) benchmark::DoNotOptimize(capacity(kRef, m));
}
BENCHMARK(BM_Capacity)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MmseBound(benchmark::State& st) {
  DensityGridSpec spec;
  spec.workers = 1;
  for (auto _ : st) benchmark::DoNotOptimize(mmse_bound(kRef, 10.0, MmseOrdering::kLower, spec));
}
BENCHMARK(BM_MmseBound)->Unit(benchmark::kMillisecond);

void BM_EnsembleTrial(benchmark::State& st) {
  const int K = int(st.range(0));
  const SystemParams p{K, K, 10.0, 10.0};
  EnsembleOptions opt;
  opt.workers = 1;
  opt.eigenvalues = false;
  for (auto _ : st) benchmark::DoNotOptimize(run_ensemble(p, TslParams{10.0}, 1, 7, opt));
}
BENCHMARK(BM_EnsembleTrial)->Arg(10)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
