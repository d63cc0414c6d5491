// Parallel top-k scan against the serial reference.

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "maid/retrieval.hpp"

namespace {

std::vector<float> unit_rows(std::size_t count, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<float> out(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < dim; ++j) s += double(out[i * dim + j] = g(rng)) * out[i * dim + j];
        const float inv = static_cast<float>(1.0 / std::sqrt(s));
        for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] *= inv;
    }
    return out;
}

constexpr std::size_t kDim = 256;

void BM_TopkReference(benchmark::State& state) {
    const auto rows = unit_rows(static_cast<std::size_t>(state.range(0)), kDim, 1);
    const auto query = unit_rows(1, kDim, 2);
    for (auto _ : state) benchmark::DoNotOptimize(maid::kernels::topk_reference(rows, kDim, query, 10));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TopkParallel(benchmark::State& state) {
    const auto rows = unit_rows(static_cast<std::size_t>(state.range(0)), kDim, 1);
    const auto query = unit_rows(1, kDim, 2);
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(maid::kernels::topk_parallel(rows, kDim, query, 10, workers));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TopkReference)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TopkParallel)
    ->ArgsProduct({{10'000, 100'000}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
