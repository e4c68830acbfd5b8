// Serial reference against the OpenMP kernels: simulator ensembles and
// nonlinear-process particle replicas.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "urnfield/engine.hpp"
#include "urnfield/meanfield.hpp"

using namespace urnfield;

namespace {

SimConfig ensemble_config() {
  SimConfig c;
  c.topology.kind = TopologyKind::Torus;
  c.topology.n = 400;
  c.topology.alpha = 0.1;
  c.policy = PolicySpec::power_of_d(2);
  c.beta = 2.0;
  c.horizon = 5.0;
  c.seed = 1;
  c.record_grid = uniform_grid(5.0, 0.1);
  return c;
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto c = ensemble_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble_serial(c, 16));
}

void BM_EnsembleOpenMP(benchmark::State& state) {
  const auto c = ensemble_config();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(c, 16, threads));
}

struct MckvSetup {
  PolicySpec policy = PolicySpec::power_of_d(2);
  Pmf initial = Pmf::dirac(2);
  MeanFieldSolution path = solve_fp(policy, initial, 2.0, uniform_grid(5.0, 0.01));
};

const MckvSetup& mckv_setup() {
  static const MckvSetup setup;
  return setup;
}

void BM_MckvSerial(benchmark::State& state) {
  const auto& s = mckv_setup();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_mckv_serial(s.policy, s.path, s.initial, 2.0, 20000, 3));
}

void BM_MckvOpenMP(benchmark::State& state) {
  const auto& s = mckv_setup();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_mckv(s.policy, s.path, s.initial, 2.0, 20000, 3, threads));
}

void thread_counts(benchmark::internal::Benchmark* b) {
  for (int t = 1; t <= omp_get_max_threads(); t *= 2) b->Arg(t);
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleOpenMP)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MckvSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MckvOpenMP)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
