#include <benchmark/benchmark.h>

#include <sparselogit/baselines.hpp>
#include <sparselogit/calibration.hpp>
#include <sparselogit/simulation.hpp>
#include <sparselogit/solver.hpp>

using namespace sparselogit;

namespace {

// Simulation design with n = 200, s = 5, kappa = 0.5 and p from the benchmark argument.
Dataset instance(std::size_t p) {
    const Matrix X = generate_design(200, p, 0.5, 11);
    const SparseTruth truth = generate_truth(p, 5, 12);
    return Dataset(X, generate_response(X, truth.beta_star, 13));
}

void BM_FitPath(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const Dataset data = instance(p);
    const LambdaGrid grid = default_grid(200, p, 500);
    for (auto _ : state) benchmark::DoNotOptimize(fit_path(data, grid));
}

void BM_Calibrate(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const Dataset data = instance(p);
    const LambdaGrid grid = default_grid(200, p, 500);
    for (auto _ : state) benchmark::DoNotOptimize(calibrate(data, grid));
}

void BM_SelectTestingOnPath(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const Dataset data = instance(p);
    const RegularizationPath path = fit_path(data, default_grid(200, p, 500));
    for (auto _ : state) benchmark::DoNotOptimize(select_lambda_testing(path, kDefaultConstantC));
}

void BM_CrossValidation(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const Dataset data = instance(p);
    const LambdaGrid grid = default_grid(200, p, 500);
    for (auto _ : state) benchmark::DoNotOptimize(select_cross_validation(data, grid, {10, 7}));
}

}  // namespace

BENCHMARK(BM_FitPath)->Arg(50)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Calibrate)->Arg(50)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelectTestingOnPath)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossValidation)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
