#include <benchmark/benchmark.h>

#include "bdfl/definetti_q.hpp"
#include "bdfl/gibbs.hpp"

using namespace bdfl;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

void label(benchmark::State& state, std::int64_t samples) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
  state.SetItemsProcessed(state.iterations() * samples);
}

void BM_CkmrReduced(benchmark::State& state) {
  const SectorOperator gamma = random_density(2, 20, 5, 42, 0);
  const std::int64_t samples = 100000;
  for (auto _ : state) {
    SphereSampler s(2, 42, stream::kCkmr);
    benchmark::DoNotOptimize(ckmr_reduced_mc(gamma, 2, samples, s, mode(state)));
  }
  label(state, samples);
}

void BM_ClassicalFreeEnergy(benchmark::State& state) {
  const ModelSpec m = ModelSpec::benchmark(1.5);
  const std::int64_t samples = 1000000;
  for (auto _ : state) {
    SphereSampler s(2, 42, stream::kClassicalFreeEnergy);
    benchmark::DoNotOptimize(classical_free_energy_mc(m, 0.5, samples, s, mode(state)));
  }
  label(state, samples);
}

void BM_BerezinLieb(benchmark::State& state) {
  const SectorOperator gamma = random_density(2, 10, 4, 42, 1);
  const std::int64_t samples = 100000;
  for (auto _ : state) {
    SphereSampler s(2, 42, stream::kBerezinLieb);
    benchmark::DoNotOptimize(berezin_lieb_check(gamma, samples, s, mode(state)));
  }
  label(state, samples);
}

}  // namespace

BENCHMARK(BM_CkmrReduced)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassicalFreeEnergy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BerezinLieb)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
