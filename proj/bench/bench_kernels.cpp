// Serial reference vs OpenMP kernels on a synthetic scoring workload.
//   ./bench_kernels --benchmark_filter=scores

#include <benchmark/benchmark.h>

#include <vector>

#include "bcosad/bcos_network.hpp"
#include "bcosad/kernels.hpp"
#include "bcosad/rng.hpp"
#include "bcosad/scoring.hpp"
#include "bcosad/synthetic.hpp"

namespace {

using namespace bcosad;

struct Workload {
    SyntheticBenchmark data;
    BcosNetwork net;
    MemoryBank bank;
    ScoreConfig cfg;
};

Workload make_workload(std::size_t train_n) {
    SyntheticConfig sc;
    sc.dim = 64;
    sc.subspace_dim = 8;
    sc.train_normals = train_n;
    sc.test_normals = 1000;
    sc.test_familiar = 500;
    sc.test_novel = 500;
    auto data = make_synthetic_benchmark(sc);
    Rng rng(7);
    const std::vector<std::size_t> dims = {64, 64, 32, 2};
    auto net = BcosNetwork::random(dims, rng, 2.0);
    const std::size_t layer = default_feature_layer(net);
    MemoryBank bank(kernels::serial::batch_features(net, data.train.samples, layer), layer);
    ScoreConfig cfg;
    cfg.feature_layer = layer;
    return {std::move(data), std::move(net), std::move(bank), cfg};
}

const Workload& workload(std::size_t train_n) {
    static std::vector<std::pair<std::size_t, Workload>> cache;
    for (const auto& [n, w] : cache)
        if (n == train_n) return w;
    cache.emplace_back(train_n, make_workload(train_n));
    return cache.back().second;
}

template <bool Parallel>
void BM_batch_scores(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    const auto& queries = w.data.test_combined.samples;
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::batch_scores(w.net, w.bank, queries, w.cfg)
                          : kernels::serial::batch_scores(w.net, w.bank, queries, w.cfg);
        benchmark::DoNotOptimize(r.ffs.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.rows()));
}

template <bool Parallel>
void BM_ffs_leave_one_out(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::batch_ffs_leave_one_out(w.bank, 2)
                          : kernels::serial::batch_ffs_leave_one_out(w.bank, 2);
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.bank.size()));
}

template <bool Parallel>
void BM_batch_features(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    const auto& samples = w.data.train.samples;
    for (auto _ : state) {
        auto f = Parallel ? kernels::omp::batch_features(w.net, samples, 2)
                          : kernels::serial::batch_features(w.net, samples, 2);
        benchmark::DoNotOptimize(f.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.rows()));
}

}  // namespace

BENCHMARK(BM_batch_scores<false>)->Name("scores/serial")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_scores<true>)->Name("scores/omp")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ffs_leave_one_out<false>)->Name("ffs_loo/serial")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ffs_leave_one_out<true>)->Name("ffs_loo/omp")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_batch_features<false>)->Name("features/serial")->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_features<true>)->Name("features/omp")->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
