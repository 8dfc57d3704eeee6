#include <memory>

#include <benchmark/benchmark.h>

#include "fdd/discovery.hpp"
#include "fdd/domains.hpp"
#include "fdd/lstd.hpp"

namespace {

fdd::SampleSet mountain_car_samples(std::size_t n) {
  fdd::MountainCarParams p;
  p.bins_per_dim = 20;
  return fdd::simulate(fdd::MountainCarDomain(p), n, 1);
}

void BM_LstdFit(benchmark::State& state) {
  const auto samples = mountain_car_samples(static_cast<std::size_t>(state.range(0)));
  const auto chi = fdd::FeatureSet::singletons(40);
  for (auto _ : state) benchmark::DoNotOptimize(fdd::lstd_fit(samples, chi, 0.95));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LstdFit)->Arg(1000)->Arg(10000);

void BM_ScoreIfddPlus(benchmark::State& state) {
  const auto samples = mountain_car_samples(10000);
  const auto chi = fdd::FeatureSet::singletons(40);
  const auto encoded = fdd::encode_samples(samples, chi);
  const auto sol = fdd::lstd_fit(encoded, samples, chi.size(), 0.95);
  const auto deltas = fdd::sample_td_errors(encoded, samples, sol.theta, 0.95);
  const auto method = fdd::DiscoveryMethod::ifdd_plus();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fdd::score_candidates(method, chi, samples, encoded, deltas, sol.theta, 0.95));
  }
}
BENCHMARK(BM_ScoreIfddPlus);

void BM_ScoreOmpTd(benchmark::State& state) {
  const auto samples = mountain_car_samples(10000);
  const fdd::MountainCarDomain domain;
  const auto chi = domain.initial_features();
  const auto encoded = fdd::encode_samples(samples, chi);
  const auto sol = fdd::lstd_fit(encoded, samples, chi.size(), 0.95);
  const auto deltas = fdd::sample_td_errors(encoded, samples, sol.theta, 0.95);
  const auto method = fdd::DiscoveryMethod::omp_td(
      fdd::build_pool(40, chi, static_cast<std::size_t>(state.range(0)), domain.exclusive_groups()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fdd::score_candidates(method, chi, samples, encoded, deltas, sol.theta, 0.95));
  }
}
BENCHMARK(BM_ScoreOmpTd)->Arg(100)->Arg(440);

void BM_Pair(benchmark::State& state) {
  const auto chi = fdd::FeatureSet::singletons(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fdd::pair(chi));
}
BENCHMARK(BM_Pair)->Arg(16)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
