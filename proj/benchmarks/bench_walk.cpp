#include <benchmark/benchmark.h>

#include "walkdiff/process.hpp"
#include "walkdiff/walk.hpp"

namespace {

using namespace walkdiff;
using increments::IncrementKind;

void BM_ForwardSteps(benchmark::State& state, IncrementKind kind) {
  const auto spec = process::make_process(process::constant_schedule(-5.0, std::sqrt(10.0)),
                                          process::build_grid(std::size_t{512}));
  RngStream rng(1);
  const double x0[] = {1.0};
  for (auto _ : state) {
    auto path = walk::simulate_forward(spec, kind, x0, rng);
    benchmark::DoNotOptimize(path.states.back());
  }
  state.SetItemsProcessed(state.iterations() * 512);
}

void BM_Moments(benchmark::State& state) {
  const auto spec = process::make_process(process::vdm_schedule(-6.0, 6.0),
                                          process::build_grid(std::size_t(state.range(0))));
  for (auto _ : state) {
    auto table = process::moments(spec);
    benchmark::DoNotOptimize(table.gamma_bar.back());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_ForwardSteps, gaussian, IncrementKind::gaussian);
BENCHMARK_CAPTURE(BM_ForwardSteps, laplace, IncrementKind::laplace);
BENCHMARK_CAPTURE(BM_ForwardSteps, uniform, IncrementKind::uniform);
BENCHMARK(BM_Moments)->Arg(1024)->Arg(65536);

BENCHMARK_MAIN();
