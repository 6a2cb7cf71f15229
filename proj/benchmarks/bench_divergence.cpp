#include <benchmark/benchmark.h>

#include "walkdiff/divergence.hpp"

namespace {

using namespace walkdiff::divergence;

void BM_KlClosedForms(benchmark::State& state) {
  double acc = 0.0;
  for (auto _ : state) {
    acc += kl_gauss_gauss(1.0, 0.0, 0.7);
    acc += kl_laplace_laplace(1.0, 0.7, 0.0, 1.1);
    acc += kl_unif_gauss(1.0, 0.0, 0.7);
    acc += kl_unif_laplace(1.0, 1.2, 0.0, 0.5);
    benchmark::DoNotOptimize(acc);
  }
}

void BM_KlQuadrature(benchmark::State& state) {
  for (auto _ : state) {
    const double v = kl_quadrature(uniform_dist(1.0, 1.2), laplace_dist(0.0, 0.5));
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK(BM_KlClosedForms);
BENCHMARK(BM_KlQuadrature);
