#include <benchmark/benchmark.h>

#include "jumplq/benchmarks.hpp"
#include "jumplq/feedback.hpp"
#include "jumplq/montecarlo.hpp"
#include "jumplq/riccati.hpp"

using namespace jumplq;

namespace {

const char* const kNames[] = {"scalar-riccati", "coupled-2d", "two-regime", "random-psd(11,3,2,2,2,2)"};

void BM_SolveDirect(benchmark::State& state) {
  const LqProblem p = canned_problem(kNames[state.range(0)]);
  const TimeGrid grid(static_cast<std::size_t>(state.range(1)), p.T);
  for (auto _ : state) benchmark::DoNotOptimize(solve_direct(p, grid));
  state.SetLabel(kNames[state.range(0)]);
}
BENCHMARK(BM_SolveDirect)->ArgsProduct({{0, 1, 2, 3}, {1000, 10000}})->Unit(benchmark::kMillisecond);

void BM_Quasilinearization(benchmark::State& state) {
  const LqProblem p = canned_problem(kNames[state.range(0)]);
  const TimeGrid grid(1000, p.T);
  for (auto _ : state) benchmark::DoNotOptimize(solve_quasilinearization(p, grid, 1e-8));
  state.SetLabel(kNames[state.range(0)]);
}
BENCHMARK(BM_Quasilinearization)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SimulatePath(benchmark::State& state) {
  const LqProblem p = canned_problem(kNames[state.range(0)]);
  const TimeGrid grid(1000, p.T);
  const Control u = Control::feedback(gain_from_riccati(p, solve_direct(p, grid)));
  std::uint64_t i = 0;
  for (auto _ : state) {
    const auto noise = sample_noise(p, grid, i++, 1);
    benchmark::DoNotOptimize(simulate_cost(p, u, noise, grid));
  }
  state.SetLabel(kNames[state.range(0)]);
}
BENCHMARK(BM_SimulatePath)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_SampleNoise(benchmark::State& state) {
  const LqProblem p = canned_problem("two-regime");
  const TimeGrid grid(static_cast<std::size_t>(state.range(0)), p.T);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_noise(p, grid, i++, 1));
}
BENCHMARK(BM_SampleNoise)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_EstimateCost(benchmark::State& state) {
  const LqProblem p = canned_problem("coupled-2d");
  const TimeGrid grid(1000, p.T);
  const Control u = Control::feedback(gain_from_riccati(p, solve_direct(p, grid)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_cost(p, u, grid, static_cast<std::size_t>(state.range(0)), 42));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateCost)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
