#include <lppi/datagen.hpp>
#include <lppi/draws.hpp>
#include <lppi/latent.hpp>
#include <lppi/projection.hpp>
#include <lppi/search.hpp>

#include <benchmark/benchmark.h>

#include <map>

using namespace lppi;

namespace {

struct Fixture
{
    Dataset data;
    LatentReference latent;
};

// Cached per (family, D): the desk fit dominates setup.
const Fixture& fixture(Family family, Index d)
{
    static std::map<std::pair<int, Index>, Fixture> cache;
    auto key = std::make_pair(static_cast<int>(family), d);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto config = SimConfig::for_family(family, 100, d, 0.3, 1);
    Fixture f;
    f.data = simulate(config).train;
    DeskFitOptions fit;
    fit.draws = 200;
    f.latent = latent_predictions(fit_reference_desk(f.data, config.model, fit), f.data);
    return cache.emplace(key, std::move(f)).first->second;
}

void search(benchmark::State& state, ProjectionMode mode)
{
    const auto& f = fixture(Family::bernoulli, state.range(0));
    SearchConfig config;
    config.mode = mode;
    config.max_size = std::min<Index>(state.range(0), 20);
    config.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(forward_search(f.latent, f.data, config));
}

void BM_SearchLatent(benchmark::State& state) { search(state, ProjectionMode::latent); }
void BM_SearchResponse(benchmark::State& state) { search(state, ProjectionMode::response); }

void BM_ProjectSubmodel(benchmark::State& state)
{
    const auto mode = state.range(1) == 0 ? ProjectionMode::latent : ProjectionMode::response;
    const auto& f = fixture(Family::poisson, 50);
    const auto clusters = cluster_draws(f.latent, 20, 1);
    std::vector<Index> subset;
    for (Index j = 0; j < state.range(0); ++j) subset.push_back(j);
    for (auto _ : state) benchmark::DoNotOptimize(project_submodel(f.latent, clusters, f.data, subset, mode));
}

void BM_ClusterDraws(benchmark::State& state)
{
    const auto& f = fixture(Family::bernoulli, 50);
    for (auto _ : state) benchmark::DoNotOptimize(cluster_draws(f.latent, state.range(0), 1));
}

} // namespace

BENCHMARK(BM_SearchLatent)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SearchResponse)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectSubmodel)->ArgsProduct({{5, 20}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ClusterDraws)->Arg(5)->Arg(20)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
