#include <benchmark/benchmark.h>

#include "kcd/dynamics.hpp"
#include "kcd/graph.hpp"
#include "kcd/keystream.hpp"

namespace {

struct Fixture {
    kcd::WeightMatrix w;
    kcd::Matrix y;
};

Fixture make(std::size_t d, std::size_t cols) {
    kcd::KeyedStream s(kcd::Digest{});
    const std::size_t k = d >= 12 ? 10 : 2;
    const auto a = kcd::sample_ws(d, k, 0.2, s);
    Fixture f{kcd::sample_weights(a, 0.2, s), kcd::Matrix(d, cols)};
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < cols; ++c) f.y(i, c) = s.unit_uniform();
    return f;
}

template <void (*Kernel)(const kcd::SparseRows&, const kcd::Matrix&, kcd::Matrix&)>
void run(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const auto cols = static_cast<std::size_t>(state.range(1));
    const Fixture f = make(d, cols);
    kcd::Matrix out(d, cols);
    for (auto _ : state) {
        Kernel(f.w.sparse(), f.y, out);
        benchmark::DoNotOptimize(out(0, 0));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d * cols));
}

void shapes(benchmark::internal::Benchmark* b) {
    for (long d : {64L, 512L, 2048L})
        for (long c : {1L, 2L}) b->Args({d, c});
}

}  // namespace

BENCHMARK(run<kcd::kernels::diffuse_serial>)->Name("diffuse_serial")->Apply(shapes);
BENCHMARK(run<kcd::kernels::diffuse>)->Name("diffuse_openmp")->Apply(shapes)->UseRealTime();

BENCHMARK_MAIN();
