#include <benchmark/benchmark.h>

#include "hodgemix/lbi.hpp"
#include "hodgemix/operators.hpp"
#include "hodgemix/simulation.hpp"
#include "hodgemix/solvers.hpp"

namespace {

using namespace hodgemix;

const ComparisonDataset& bench_dataset() {
  static const ComparisonDataset ds = [] {
    SimulationConfig config;
    config.n_annotators = 100;
    config.n_min = 80;
    config.n_max = 120;
    config.rng_seed = 1;
    return simulate(config).dataset;
  }();
  return ds;
}

void BM_ApplyD(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  const Eigen::VectorXd theta = Eigen::VectorXd::Random(ds.n_items());
  for (auto _ : state) benchmark::DoNotOptimize(apply_d(ds, theta));
  state.SetItemsProcessed(state.iterations() * ds.n_records());
}
BENCHMARK(BM_ApplyD);

void BM_ApplyXAdjoint(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  const Eigen::VectorXd r = Eigen::VectorXd::Random(ds.n_records());
  for (auto _ : state) benchmark::DoNotOptimize(apply_X_adjoint(ds, r));
  state.SetItemsProcessed(state.iterations() * ds.n_records());
}
BENCHMARK(BM_ApplyXAdjoint);

void BM_Shrinkage(benchmark::State& state) {
  const BetaLayout layout{30, 500};
  const Eigen::VectorXd z = Eigen::VectorXd::Random(layout.size());
  for (auto _ : state) benchmark::DoNotOptimize(shrinkage(z, 100.0, layout));
}
BENCHMARK(BM_Shrinkage);

void BM_Hodgerank(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  for (auto _ : state) benchmark::DoNotOptimize(hodgerank(ds));
}
BENCHMARK(BM_Hodgerank);

void BM_SpectralNorm(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm_xtx(ds));
}
BENCHMARK(BM_SpectralNorm);

// Whole-path cost per iteration, amortized over a 200-step budget.
void BM_LbiIterations(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  LbiConfig config;
  config.max_iterations = 200;
  config.checkpoint_every = 200;
  for (auto _ : state) benchmark::DoNotOptimize(lbi_fit(ds, config));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_LbiIterations)->Unit(benchmark::kMillisecond);

void BM_FullLeastSquares(benchmark::State& state) {
  const ComparisonDataset& ds = bench_dataset();
  LsSolveOptions options;
  options.rel_tolerance = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(full_least_squares(ds, options));
}
BENCHMARK(BM_FullLeastSquares)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
