#include <benchmark/benchmark.h>

#include <vector>

#include "walkdiff/analysis.hpp"
#include "walkdiff/rng.hpp"

namespace {

using namespace walkdiff;

void BM_KsTwoSample(benchmark::State& state) {
  RngStream rng(1);
  std::vector<double> a(100'000), b(100'000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto _ : state) {
    auto r = analysis::ks_two_sample(a, b);
    benchmark::DoNotOptimize(r.statistic);
  }
}

void BM_EnergyPermutationTest(benchmark::State& state) {
  RngStream rng(2);
  const std::size_t n = std::size_t(state.range(0));
  std::vector<double> a(n * 2), b(n * 2);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  analysis::EnergyOptions opt;
  opt.permutations = 200;
  for (auto _ : state) {
    RngStream perm_rng(3);
    auto r = analysis::energy_distance(a, b, 2, perm_rng, opt);
    benchmark::DoNotOptimize(r.p_value);
  }
}

}  // namespace

BENCHMARK(BM_KsTwoSample);
BENCHMARK(BM_EnergyPermutationTest)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
