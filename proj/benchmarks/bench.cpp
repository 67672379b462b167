// Microbenchmarks for the hot paths: smoothed-rate evaluation, full sTPR
// fits, quantile thresholds and ROC curves at evaluation scale, and
// scenario generation throughput.

#include "stpr/baselines.hpp"
#include "stpr/roc.hpp"
#include "stpr/simgen.hpp"
#include "stpr/smooth.hpp"
#include "stpr/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

namespace {

stpr::Dataset contaminated(std::uint64_t seed) {
    return stpr::gen_contaminated(800, 50, seed).data;
}

Eigen::VectorXd random_scores(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd scores(n);
    for (int i = 0; i < n; ++i) scores[i] = normal(rng);
    return scores;
}

void bm_smooth_rate(benchmark::State& state) {
    const stpr::Dataset data = contaminated(1);
    Eigen::VectorXd theta(2);
    theta << std::sqrt(0.5), std::sqrt(0.5);
    const double h = stpr::select_bandwidth(theta, data);
    for (auto _ : state)
        benchmark::DoNotOptimize(stpr::smooth_tpr(theta, 0.6, data.cases, h));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(data.n_cases()));
}
BENCHMARK(bm_smooth_rate);

void bm_smooth_rate_expansion(benchmark::State& state) {
    const stpr::Dataset data = contaminated(1);
    Eigen::VectorXd theta(2);
    theta << std::sqrt(0.5), std::sqrt(0.5);
    const double h = stpr::select_bandwidth(theta, data);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            stpr::smooth_rate_expansion(data.cases, theta, 0.6, h));
}
BENCHMARK(bm_smooth_rate_expansion);

void bm_fit_logistic(benchmark::State& state) {
    const stpr::Dataset data = contaminated(2);
    for (auto _ : state) benchmark::DoNotOptimize(stpr::fit_logistic(data));
}
BENCHMARK(bm_fit_logistic);

void bm_fit_robust_logistic(benchmark::State& state) {
    const stpr::Dataset data = contaminated(2);
    for (auto _ : state) benchmark::DoNotOptimize(stpr::fit_robust_logistic(data));
}
BENCHMARK(bm_fit_robust_logistic);

void bm_fit_stpr(benchmark::State& state) {
    const stpr::Dataset data = contaminated(2);
    stpr::SolverConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(stpr::fit_stpr(data, config));
}
BENCHMARK(bm_fit_stpr);

void bm_grid_search(benchmark::State& state) {
    const stpr::Dataset data = contaminated(3);
    for (auto _ : state) benchmark::DoNotOptimize(stpr::grid_search(data, 0.2));
}
BENCHMARK(bm_grid_search);

void bm_threshold_at_scale(benchmark::State& state) {
    const Eigen::VectorXd scores = random_scores(4, 100000);
    for (auto _ : state)
        benchmark::DoNotOptimize(stpr::threshold_for_fpr_scores(scores, 0.2));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            scores.size());
}
BENCHMARK(bm_threshold_at_scale);

void bm_roc_auc(benchmark::State& state) {
    const Eigen::VectorXd cases = random_scores(5, 10000).array() + 0.5;
    const Eigen::VectorXd controls = random_scores(6, 10000);
    for (auto _ : state)
        benchmark::DoNotOptimize(stpr::auc(stpr::roc_curve(cases, controls)));
}
BENCHMARK(bm_roc_auc);

void bm_gen_contaminated(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(stpr::gen_contaminated(800, 50, ++seed));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 850);
}
BENCHMARK(bm_gen_contaminated);

void bm_gen_mixture(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            stpr::gen_mixture(100000, stpr::MixtureLink::f1, 0.0, true, ++seed));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000);
}
BENCHMARK(bm_gen_mixture);

}  // namespace

BENCHMARK_MAIN();
