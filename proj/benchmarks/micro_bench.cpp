#include <benchmark/benchmark.h>

#include "ricl/datagen.hpp"
#include "ricl/inner_solver.hpp"
#include "ricl/laricl.hpp"
#include "ricl/ricl.hpp"
#include "ricl/softmax_regression.hpp"

namespace {

using namespace ricl;

Dataset dataset(long size) {
  return gen_dataset(1, PrefixKind::noisy(0.8), size, size, 2 * size, 20, 20);
}

void BM_SrGradient(benchmark::State& state) {
  RngStream rng(1, 0);
  const auto n = state.range(0);
  const Matrix a = gauss_matrix(n, n, rng);
  const Vector b = gauss_vector(n, rng), x = gauss_vector(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sr_gradient(a, b, x));
}
BENCHMARK(BM_SrGradient)->Arg(8)->Arg(16)->Arg(64);

void BM_InnerSolve(benchmark::State& state) {
  const auto ds = dataset(state.range(0));
  const Vector w = Vector::Ones(static_cast<Eigen::Index>(ds.prefix.size()));
  InnerConfig cfg;
  cfg.project_radius = 2.0 * std::sqrt(double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_weighted_softmax(ds.prefix, w, cfg));
}
BENCHMARK(BM_InnerSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MetaGradientOsl(benchmark::State& state) {
  const auto ds = dataset(state.range(0));
  RiclConfig cfg;
  const auto params = ricl_initial_params(ds.prefix, cfg);
  const Vector x = Vector::Zero(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        meta_gradient(RiclMode::kScalar, params, x, ds.prefix, ds.validation, OneStepLookahead{}));
}
BENCHMARK(BM_MetaGradientOsl)->Arg(8)->Arg(16);

void BM_LariclGradient(benchmark::State& state) {
  const auto ds = dataset(state.range(0));
  const Vector w = Vector::Ones(weight_length(ds.prefix));
  for (auto _ : state)
    benchmark::DoNotOptimize(laricl_grad(w, ds.prefix, ds.validation, AnalyticGradient{}));
}
BENCHMARK(BM_LariclGradient)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
