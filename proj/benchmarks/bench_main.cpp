#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "slicelab/experiment.hpp"
#include "slicelab/oracle.hpp"
#include "slicelab/projection.hpp"
#include "slicelab/simulator.hpp"

using namespace slicelab;

static void BM_CappedSimplex(benchmark::State& state) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  std::vector<double> y(static_cast<std::size_t>(state.range(0)));
  for (auto& v : y) v = u(gen);
  for (auto _ : state) benchmark::DoNotOptimize(project_capped_simplex(y));
}
BENCHMARK(BM_CappedSimplex)->Arg(3)->Arg(16)->Arg(128);

static void BM_ProjectReferenceAllocation(benchmark::State& state) {
  const auto c = reference_scenario();
  ConstraintSet cs(c.scenario.topology);
  AllocationMatrix m = c.scenario.alloc;
  for (auto& [id, row] : m.rows) {
    for (std::size_t d = 0; d < row.dim(); ++d) row[d] += 0.3;
  }
  for (auto _ : state) benchmark::DoNotOptimize(project_constraint_set(m, cs));
}
BENCHMARK(BM_ProjectReferenceAllocation);

static void BM_SimulateReference(benchmark::State& state) {
  const auto c = reference_scenario();
  SimConfig cfg = c.sim;
  cfg.horizon_s = static_cast<double>(state.range(0));
  cfg.warmup_s = 0.0;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(run_sim(c.scenario, c.scenario.alloc, cfg));
  }
}
BENCHMARK(BM_SimulateReference)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_ReferenceSeed(benchmark::State& state) {
  const auto c = reference_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(run_seed(c, 1, false));
}
BENCHMARK(BM_ReferenceSeed)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
