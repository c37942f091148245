// Serial reference vs OpenMP kernels: Monte Carlo replicates and nodewise M rows.
#include <benchmark/benchmark.h>

#include "partlasso/debias.hpp"
#include "partlasso/simlab.hpp"

using namespace partlasso;

namespace {

MonteCarloConfig mc_config() {
  MonteCarloConfig c;
  c.design = {.family = DesignFamily::gaussian_iid, .n = 100, .p = 60, .g = {0, 1}};
  c.replicates = 64;
  c.phi0 = 0.5;
  return c;
}

const PartitionedDesign& nodewise_design() {
  static const PartitionedDesign d =
      generate_design({.family = DesignFamily::gaussian_ar1, .n = 200, .p = 120, .rho = 0.5, .g = {0}}, 7);
  return d;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const auto c = mc_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo_serial(c));
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const auto c = mc_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(c));
}

void BM_NodewiseSerial(benchmark::State& state) {
  const auto& d = nodewise_design();
  const double lam = default_lambda_node(d);
  for (auto _ : state) benchmark::DoNotOptimize(choose_m_nodewise_serial(d, lam));
}

void BM_NodewiseParallel(benchmark::State& state) {
  const auto& d = nodewise_design();
  const double lam = default_lambda_node(d);
  for (auto _ : state) benchmark::DoNotOptimize(choose_m_nodewise(d, lam));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NodewiseSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NodewiseParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
