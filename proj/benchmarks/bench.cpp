#include <benchmark/benchmark.h>

#include <cmath>

#include "layerctl/curl_lift.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/heat.hpp"
#include "layerctl/layer.hpp"

using namespace layerctl;

static void BM_HeatEvolve(benchmark::State& state) {
    const heat::ZGrid grid{64.0, static_cast<std::size_t>(state.range(0))};
    const auto f0 = heat::make_vanishing_moment_data(2, 1.0, grid);
    for (auto _ : state) benchmark::DoNotOptimize(heat::heat_evolve(f0, 3.0).values.data());
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HeatEvolve)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity(benchmark::oNLogN);

static void BM_Lift2D(benchmark::State& state) {
    const auto tf = lift::sample_test_field(2, 5, 3, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lift::lift2d(tf.f2).xi1.data());
}
BENCHMARK(BM_Lift2D)->RangeMultiplier(2)->Range(32, 256);

static void BM_Lift3D(benchmark::State& state) {
    const auto tf = lift::sample_test_field(3, 4, 2, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lift::lift3d(tf.f3).xi.data());
}
BENCHMARK(BM_Lift3D)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);

static void BM_FlowMap(benchmark::State& state) {
    const auto flow = make_reference_flow("perturbed-channel", {{"T", 1.0}, {"displacement", 1.6}, {"kappa", 0.3}});
    const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(flow_map(flow, 0.0, 1.0, {0.3, 0.4}, tol));
}
BENCHMARK(BM_FlowMap)->DenseRange(6, 12, 2);

static void BM_SolveTheta(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double pi = 3.14159265358979323846;
    const Box box{0.0, 1.0, 0.0, 1.0};
    const auto src = [pi](const Vec2& x) { return -2.0 * pi * pi * std::cos(pi * x.x) * std::cos(pi * x.y); };
    const auto flux = [](const Vec2&, const Vec2&) { return 0.0; };
    for (auto _ : state) benchmark::DoNotOptimize(layer::solve_theta(box, n, n, src, flux).residual);
}
BENCHMARK(BM_SolveTheta)->RangeMultiplier(2)->Range(17, 129)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
