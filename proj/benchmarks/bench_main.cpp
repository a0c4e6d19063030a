// Microbenchmarks for the hot paths: the EM fit itself, its E-step, the
// observed-information assembly, far-tail truncated-Gaussian evaluation,
// interval inversion, and a whole simulation-study replicate.

#include <benchmark/benchmark.h>

#include <cmath>
#include <limits>

#include "gtsel/em_lasso.hpp"
#include "gtsel/inference.hpp"
#include "gtsel/information.hpp"
#include "gtsel/selection.hpp"
#include "gtsel/simulation.hpp"
#include "gtsel/truncated_normal.hpp"

namespace {

using namespace gtsel;

SimulatedData make_data(int n, int pool_size, std::uint64_t seed) {
  DgpConfig config = DgpConfig::defaults(n, pool_size);
  config.seed = seed;
  return simulate_dataset(config);
}

void BM_EmFit(benchmark::State& state) {
  const SimulatedData sim =
      make_data(static_cast<int>(state.range(0)),
                static_cast<int>(state.range(1)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(em_fit(sim.data, 2.5));
  }
}
BENCHMARK(BM_EmFit)->Args({250, 1})->Args({1000, 1})->Args({1000, 4});

void BM_EStep(benchmark::State& state) {
  const SimulatedData sim = make_data(1000, static_cast<int>(state.range(0)), 7);
  const Coefficients theta = default_init(sim.data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(e_step_group(theta, sim.data));
  }
}
BENCHMARK(BM_EStep)->Arg(1)->Arg(4);

void BM_LouisInformation(benchmark::State& state) {
  const SimulatedData sim = make_data(1000, 2, 11);
  PenalizedFit fit = em_fit(sim.data, 2.5);
  fit.y_hat = e_step_group(fit.theta_hat, sim.data);
  const SubmodelCoefficients theta = fit.submodel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(louis_information(fit, theta, sim.data));
  }
}
BENCHMARK(BM_LouisInformation);

void BM_TruncatedTailCdf(benchmark::State& state) {
  const double shift = static_cast<double>(state.range(0));
  const TruncatedGaussianSpec spec{0.0, 1.0, shift, shift + 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(truncated_normal_cdf(spec, shift + 1.0));
  }
}
BENCHMARK(BM_TruncatedTailCdf)->Arg(2)->Arg(12)->Arg(30);

void BM_SelectiveIntervals(benchmark::State& state) {
  const SimulatedData sim = make_data(1000, 2, 13);
  const PenalizedFit fit = em_fit(sim.data, 2.5);
  const PostSelectionEstimate est = make_post_selection_estimate(fit, sim.data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selective_cis(est, 0.95));
  }
}
BENCHMARK(BM_SelectiveIntervals);

void BM_StudyReplicate(benchmark::State& state) {
  StudyOptions options;
  options.config = DgpConfig::defaults(1000, static_cast<int>(state.range(0)));
  options.grid = {2.5};
  options.replicates = 1;
  options.threads = 1;
  options.split = false;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    options.seed = seed++;
    benchmark::DoNotOptimize(run_study(options));
  }
}
BENCHMARK(BM_StudyReplicate)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
