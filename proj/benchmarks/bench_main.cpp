#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "vimu/kinematics.hpp"
#include "vimu/postprocess.hpp"
#include "vimu/simnet.hpp"
#include "vimu/trajectory.hpp"

using namespace vimu;

namespace {

Vec3Series noisy_path(std::size_t n, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    Vec3Series p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / 100.0;
        p[i] = Vec3(std::sin(t) + noise(rng), std::cos(2 * t) + noise(rng), 0.1 * t + noise(rng));
    }
    return p;
}

void BM_CentralStencil(benchmark::State& state) {
    const Vec3Series p = noisy_path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kinematics::central_second_derivative(p, 100.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CentralStencil)->Arg(1000)->Arg(100000);

void BM_RichardsonStencil(benchmark::State& state) {
    const Vec3Series p = noisy_path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kinematics::richardson_second_derivative(p, 100.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RichardsonStencil)->Arg(1000)->Arg(100000);

void BM_KalmanSmooth(benchmark::State& state) {
    const Vec3Series p = noisy_path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(trajectory::kalman_smooth(p, 100.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KalmanSmooth)->Arg(1000)->Arg(100000);

void BM_Forward(benchmark::State& state) {
    const simnet::NetworkConfig config;
    const simnet::WeightBundle w = simnet::init_weights(config, 1);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    const simnet::Matrix input =
        simnet::Matrix::NullaryExpr(state.range(0), config.input_dim(), [&] { return n(rng); });
    for (auto _ : state) benchmark::DoNotOptimize(simnet::forward(w, input));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_LossAndGradient(benchmark::State& state) {
    const simnet::NetworkConfig config;
    const simnet::WeightBundle w = simnet::init_weights(config, 1);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<simnet::Matrix> inputs, targets;
    for (int k = 0; k < 8; ++k) {
        inputs.push_back(simnet::Matrix::NullaryExpr(120, config.input_dim(), [&] { return n(rng); }));
        targets.push_back(simnet::Matrix::NullaryExpr(120, 3, [&] { return n(rng); }));
    }
    for (auto _ : state) benchmark::DoNotOptimize(simnet::loss_and_gradient(w, inputs, targets));
}
BENCHMARK(BM_LossAndGradient)->Unit(benchmark::kMillisecond);

void BM_Lowpass(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    const post::Channels data = post::Channels::NullaryExpr(state.range(0), 6, [&] { return n(rng); });
    for (auto _ : state) benchmark::DoNotOptimize(post::lowpass(data, 20.0, 100.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Lowpass)->Arg(10000)->Arg(100000);

void BM_DistributionMap(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    std::vector<double> sim(static_cast<std::size_t>(state.range(0))), ref(sim.size());
    for (auto& v : sim) v = n(rng);
    for (auto& v : ref) v = std::exp(n(rng));
    for (auto _ : state) benchmark::DoNotOptimize(post::distribution_map(sim, ref));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DistributionMap)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
