// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "fpp/balls.hpp"
#include "fpp/estimation.hpp"
#include "fpp/geometry.hpp"
#include "fpp/rewards.hpp"

namespace {

fpp::Exec exec_of(const benchmark::State& st) { return st.range(0) ? fpp::Exec::parallel : fpp::Exec::serial; }

void BM_k_volume(benchmark::State& st) {
    fpp::NormSpec spec(3, 2);
    fpp::Direction dir = fpp::support_data(spec, {1, 0, 0});
    fpp::MCParams mc{400000, 7, exec_of(st)};
    for (auto _ : st) benchmark::DoNotOptimize(fpp::k_volume(spec, dir, 0.1, mc).value);
}

void BM_integral_I(benchmark::State& st) {
    fpp::NormSpec spec(2, 2);
    fpp::Direction dir = fpp::support_data(spec, {1, 0});
    fpp::MCParams mc{200000, 7, exec_of(st)};
    for (auto _ : st) benchmark::DoNotOptimize(fpp::integral_I(spec, dir, 0.2, mc).i);
}

void BM_rewards_window(benchmark::State& st) {
    fpp::NormSpec spec(2, 2);
    fpp::PointCloud pc = fpp::sample_poisson(fpp::Box({-4, -6}, {54, 6}), 1.0, 11);
    for (auto _ : st)
        benchmark::DoNotOptimize(fpp::solve_rewards_window(spec, pc, {0, 0}, {50, 0}, 0.03, {}, exec_of(st)).time);
}

void BM_balls_window(benchmark::State& st) {
    fpp::NormSpec spec(2, 2);
    fpp::PointCloud pc = fpp::sample_poisson(fpp::Box({-4, -6}, {54, 6}), 1.0, 11);
    fpp::BooleanModel model(spec, pc, 0.03);
    for (auto _ : st)
        benchmark::DoNotOptimize(fpp::solve_balls_window(model, {0, 0}, {50, 0}, {}, exec_of(st)).time);
}

void BM_estimate_mu(benchmark::State& st) {
    fpp::NormSpec spec(2, 2);
    fpp::EstimationOptions opts;
    opts.exec = exec_of(st);
    for (auto _ : st)
        benchmark::DoNotOptimize(
            fpp::estimate_mu(fpp::ModelKind::rewards, spec, {1, 0}, 0.05, {20}, 8, 3, opts).mu_hat);
}

} // namespace

BENCHMARK(BM_k_volume)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_integral_I)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rewards_window)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_balls_window)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_estimate_mu)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
