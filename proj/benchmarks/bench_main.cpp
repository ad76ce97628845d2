#include <benchmark/benchmark.h>

#include <cmath>

#include "relaychain/moments.hpp"
#include "relaychain/montecarlo.hpp"
#include "relaychain/pgfl.hpp"
#include "relaychain/pmf.hpp"

using namespace relaychain;

namespace {

SystemParams params(double lambda, double p, InterferenceMode mode = InterferenceMode::dependent) {
    return SystemParams(lambda, p, 0.1, PathLossModel::bounded(3.0), mode);
}

void BM_PowerIntegral(benchmark::State& state) {
    const auto chain = uniform_chain(1, 1.0);
    const auto f = link_factor(chain, params(1.0, 0.5), 0);
    for (auto _ : state) benchmark::DoNotOptimize(power_integral(f, -1.0).value);
}
BENCHMARK(BM_PowerIntegral);

void BM_CouplingIntegral(benchmark::State& state) {
    const auto chain = uniform_chain(4, 1.0);
    const auto P = params(1.0, 0.5);
    const auto a = link_factor(chain, P, 0);
    const auto b = link_factor(chain, P, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(coupling_integral(a, b).value);
}
BENCHMARK(BM_CouplingIntegral)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ChainMoments(benchmark::State& state) {
    const auto chain = uniform_chain(static_cast<int>(state.range(0)), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(chain_moments(chain, params(1.0, 1.0)).get().total_var);
}
BENCHMARK(BM_ChainMoments)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SingleLinkPmf(benchmark::State& state) {
    const auto chain = uniform_chain(1, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(travel_time_pmf(chain, params(0.5, 0.5), static_cast<int>(state.range(0))).mass);
}
BENCHMARK(BM_SingleLinkPmf)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
    const auto chain = uniform_chain(3, 1.0 / 3);
    const auto P = params(1.0, state.range(0) ? 1.0 : 0.5);
    McConfig c;
    c.trials = 2000;
    for (auto _ : state) benchmark::DoNotOptimize(estimate(chain, P, c).mean);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.trials));
}
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
