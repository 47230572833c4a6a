#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "scalelaw/fitter.hpp"
#include "scalelaw/infotheory.hpp"
#include "scalelaw/rho.hpp"
#include "scalelaw/synth.hpp"
#include "scalelaw/transfer.hpp"

namespace {

using namespace scalelaw;

const InfoResolutionParams kSource{{24.96, 0.35, 45.02, 0.33, 2.80}, 0.19, 1.0, 2.61};

std::vector<RunRecord> sweep(std::size_t per_axis, double sigma) {
  SweepSpec spec;
  spec.params = kSource;
  spec.n_values = log_space(1e4, 1e9, per_axis);
  spec.d_values = log_space(1e5, 1e11, per_axis);
  spec.rho_values = {1.0, 0.75, 0.5, 0.25};
  spec.noise_sigma = sigma;
  spec.seed = 1;
  return generate_sweep(spec);
}

void BM_FitInfoResolution(benchmark::State& state) {
  const auto records = sweep(static_cast<std::size_t>(state.range(0)), 0.01);
  FitConfig config;
  config.max_threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_inforesolution(records, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_FitInfoResolution)->Args({6, 1})->Args({6, 0})->Args({10, 0})->Unit(benchmark::kMillisecond);

void BM_PredictTarget(benchmark::State& state) {
  const auto grid = default_grid();
  for (auto _ : state) benchmark::DoNotOptimize(predict_target(kSource, 0.54, grid, FitConfig{}));
}
BENCHMARK(BM_PredictTarget)->Unit(benchmark::kMillisecond);

void BM_ObjectiveAndGradient(benchmark::State& state) {
  const auto records = sweep(10, 0.01);
  const auto theta = fit_detail::to_theta(kSource);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_detail::objective(theta, records, 1e-3));
    benchmark::DoNotOptimize(fit_detail::gradient(theta, records, 1e-3));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(records.size()));
}
BENCHMARK(BM_ObjectiveAndGradient);

void BM_MutualInformation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> w(n * n);
  NormalSource rng(3);
  for (auto& v : w) v = rng.uniform();
  const auto joint = DiscreteJoint::from_weights(n, n, w);
  for (auto _ : state) benchmark::DoNotOptimize(mutual_information(joint));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_MutualInformation)->Arg(16)->Arg(256)->Arg(1024);

void BM_RhoEstimators(benchmark::State& state) {
  const auto m = generate_merged_corpus(4096, 16, 200000, 7);
  for (auto _ : state) {
    switch (state.range(0)) {
      case 0: benchmark::DoNotOptimize(rho_vocab(m.source, m.target)); break;
      case 1: benchmark::DoNotOptimize(rho_ngram(m.source, m.target, 3)); break;
      default: benchmark::DoNotOptimize(rho_compress(m.source, m.target)); break;
    }
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(m.source.raw_bytes() + m.target.raw_bytes()));
  state.SetLabel(state.range(0) == 0 ? "vocab" : state.range(0) == 1 ? "ngram" : "compress");
}
BENCHMARK(BM_RhoEstimators)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
