#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <vector>

#include "tdfdr/baselines.hpp"
#include "tdfdr/simgen.hpp"
#include "tdfdr/tdp.hpp"

using namespace tdfdr;

namespace {

const SimulatedDataset& dataset(std::size_t m) {
    static std::map<std::size_t, SimulatedDataset> cache;
    auto it = cache.find(m);
    if (it == cache.end()) {
        SimSpec s;
        s.m = m;
        s.seed = 1;
        it = cache.emplace(m, gen_normal(s, 0)).first;
    }
    return it->second;
}

void BM_RegroupScore(benchmark::State& state) {
    const auto kind = static_cast<ScoreKind>(state.range(0));
    std::vector<double> buf;
    const auto s = dataset(100).data.samples(0, buf);
    const RegroupScorer scorer{s, kind};
    auto eng = rng::make_stream(1, {});
    std::vector<std::uint8_t> mask(scorer.target_mask().begin(), scorer.target_mask().end());
    for (auto _ : state) {
        std::shuffle(mask.begin(), mask.end(), eng);
        benchmark::DoNotOptimize(scorer.try_score(mask));
    }
}
BENCHMARK(BM_RegroupScore)->Arg(0)->Arg(2);

void BM_DecoyScores(benchmark::State& state) {
    std::vector<double> buf;
    const auto s = dataset(100).data.samples(3, buf);
    const RegroupScorer scorer{s, ScoreKind::AbsT};
    const auto budget = resolve_budget(20, 10, static_cast<std::size_t>(state.range(0)));
    auto eng = rng::make_stream(2, {});
    for (auto _ : state) benchmark::DoNotOptimize(decoy_scores(scorer, budget, eng));
}
BENCHMARK(BM_DecoyScores)->Arg(2)->Arg(50)->Arg(1000);

void BM_SelectThreshold(benchmark::State& state) {
    auto eng = rng::make_stream(3, {});
    std::vector<Label> labels(static_cast<std::size_t>(state.range(0)));
    for (auto& l : labels) l = rng::uniform01(eng) < 0.6 ? Label::Target : Label::Decoy;
    for (auto _ : state) benchmark::DoNotOptimize(select_threshold(labels, 1.0, 0.05));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SelectThreshold)->RangeMultiplier(10)->Range(100, 1000000)->Complexity();

void BM_RunProcedure(benchmark::State& state) {
    const auto& data = dataset(static_cast<std::size_t>(state.range(0))).data;
    TdConfig cfg;
    cfg.seed = 4;
    for (auto _ : state) benchmark::DoNotOptimize(run_procedure(data, ScoreKind::AbsT, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunProcedure)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_AdaptiveRun(benchmark::State& state) {
    const auto& data = dataset(1000).data;
    TdConfig cfg;
    cfg.variant = Variant::Adaptive;
    cfg.seed = 5;
    for (auto _ : state) benchmark::DoNotOptimize(run_procedure(data, ScoreKind::AbsT, cfg));
}
BENCHMARK(BM_AdaptiveRun)->Unit(benchmark::kMillisecond);

void BM_StoreyTTest(benchmark::State& state) {
    const auto& data = dataset(10000).data;
    for (auto _ : state) benchmark::DoNotOptimize(storey_qvalues(t_pvalues(data).p));
}
BENCHMARK(BM_StoreyTTest)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
