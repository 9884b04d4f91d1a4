// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "afos/kernels.hpp"
#include "afos/rng.hpp"

namespace {

namespace k = afos::kernels;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    afos::SeededStream rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

template <bool Parallel>
void BM_matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel)
            k::parallel::matmul(a, b, c, n, n, n);
        else
            k::serial::matmul(a, b, c, n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <bool Parallel>
void BM_conv_forward(benchmark::State& state) {
    // One 32x32x32 -> 64 filter layer over a batch of 8.
    const k::ImageDims d{8, 32, 32, 32};
    const std::size_t width = 9 * d.c, filters = 64;
    const auto in = random_vector(d.size(), 3), w = random_vector(width * filters, 4);
    std::vector<double> cols(d.pixels() * width), out(d.pixels() * filters);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::parallel::im2col3x3(in, d, cols);
            k::parallel::matmul(cols, w, out, d.pixels(), width, filters);
        } else {
            k::serial::im2col3x3(in, d, cols);
            k::serial::matmul(cols, w, out, d.pixels(), width, filters);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_activate(benchmark::State& state) {
    const auto f = afos::funcdsl::catalog("eelu3");
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pre = random_vector(n, 5);
    std::vector<double> out(n), slope(n);
    for (auto _ : state) {
        if constexpr (Parallel)
            k::parallel::activate(f, pre, out, slope);
        else
            k::serial::activate(f, pre, out, slope);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(BM_matmul<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_matmul<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_conv_forward<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_conv_forward<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_activate<false>)->Arg(1 << 16);
BENCHMARK(BM_activate<true>)->Arg(1 << 16);

BENCHMARK_MAIN();
