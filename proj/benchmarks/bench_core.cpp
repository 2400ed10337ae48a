#include <benchmark/benchmark.h>

#include <numbers>

#include "glekit/analysis.hpp"
#include "glekit/experiment.hpp"
#include "glekit/gle_sim.hpp"
#include "glekit/prony.hpp"
#include "glekit/sobolev_regress.hpp"

namespace {

using namespace glekit;

void BM_SimulateNoiseFFT(benchmark::State& state) {
  const KernelSpec kernel = KernelSpec::make_prony(sample_kernel_fivemode());
  NoiseConfig cfg;
  cfg.n_freq = static_cast<int>(state.range(0));
  cfg.delta_freq = std::numbers::pi / 100.0;
  cfg.seed = 1;
  const NoiseGenerator gen(kernel, cfg);
  const double dt = std::numbers::pi / (cfg.n_freq * cfg.delta_freq);
  for (auto _ : state) {
    auto noise = gen.generate(2 * cfg.n_freq, dt, 7);
    benchmark::DoNotOptimize(noise.data());
  }
}
BENCHMARK(BM_SimulateNoiseFFT)->Arg(1 << 12)->Arg(1 << 14);

void BM_EulerMemorySum(benchmark::State& state) {
  const KernelSpec kernel = KernelSpec::make_prony(sample_kernel_fivemode());
  SimConfig sim;
  sim.dt = 0.01;
  sim.n_steps = state.range(0);
  const std::vector<double> noise(static_cast<std::size_t>(sim.n_steps), 0.1);
  for (auto _ : state) {
    auto v = simulate_trajectory(kernel, sim, noise, 3);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EulerMemorySum)->Arg(1 << 11)->Arg(1 << 13)->Complexity(benchmark::oNSquared);

void BM_PronyFit(benchmark::State& state) {
  const PronySeries h = kernel_to_acf(sample_kernel_fivemode(), 1.0);
  CorrelationEstimate est;
  est.dt_obs = 0.7;
  for (int n = 1; n <= 24; ++n) {
    est.values_h.push_back(h.eval(n * 0.7));
    est.n_terms.push_back(400);
  }
  PronyConfig cfg;
  cfg.p_prime = 10;
  for (auto _ : state) {
    auto fit = prony_fit(est, cfg);
    benchmark::DoNotOptimize(&fit);
  }
}
BENCHMARK(BM_PronyFit);

void BM_AssembleNormalSystem(benchmark::State& state) {
  const PronySeries h = kernel_to_acf(sample_kernel_fivemode(), 1.0);
  const PronySeries g = h.derivative().scaled(-1.0);
  const SplineBasis basis =
      SplineBasis::clamped_cubic(30.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto prob = RegressionProblem::assemble(basis, h, g, 0.05);
    benchmark::DoNotOptimize(&prob);
  }
}
BENCHMARK(BM_AssembleNormalSystem)->Arg(30)->Arg(50);

void BM_CoercivityScan(benchmark::State& state) {
  const PronySeries h = kernel_to_acf(sample_kernel_fivemode(), 1.0);
  for (auto _ : state) {
    auto report = coercivity_bounds(h, 0.05, 0.9, 0.1);
    benchmark::DoNotOptimize(&report);
  }
}
BENCHMARK(BM_CoercivityScan);

}  // namespace

BENCHMARK_MAIN();
