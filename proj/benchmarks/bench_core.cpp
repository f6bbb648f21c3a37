#include "rul/decomposition.hpp"
#include "rul/features.hpp"
#include "rul/forest.hpp"
#include "rul/mlp.hpp"
#include "rul/random.hpp"
#include "rul/synthgen.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace rul;

FeatureMatrix synthetic_features(std::size_t rows)
{
    SynthConfig cfg;
    cfg.rows_per_experiment = rows;
    std::vector<FeatureMatrix> parts;
    for (const auto& frame : generate_corpus(cfg))
        parts.push_back(featurize(frame));
    return stack(parts);
}

void BM_CumulativeAuc(benchmark::State& state)
{
    Rng rng(1);
    std::vector<double> series(static_cast<std::size_t>(state.range(0)));
    for (double& v : series)
        v = rng.uniform(10.0, 40.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(cumulative_auc(series, 1.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CumulativeAuc)->Arg(1 << 14)->Arg(1 << 20);

void BM_FitPca(benchmark::State& state)
{
    const auto features = synthetic_features(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_pca(features, true));
}
BENCHMARK(BM_FitPca)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_FitForest(benchmark::State& state)
{
    const auto features = synthetic_features(static_cast<std::size_t>(state.range(0)));
    const auto pca = fit_pca(features, true);
    const auto scores = transform(pca, features, 2);
    ForestConfig cfg;
    cfg.n_trees = 10;
    cfg.seed = 3;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_forest(scores, features.response, cfg, 1));
}
BENCHMARK(BM_FitForest)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MlpGradient(benchmark::State& state)
{
    MlpConfig cfg;
    cfg.hidden_layers = {5, 3};
    const auto model = init_mlp(cfg);
    Rng rng(4);
    Matrix X(256, 5);
    for (double& v : X.data())
        v = rng.normal();
    std::vector<double> y(256);
    for (double& v : y)
        v = rng.normal();
    for (auto _ : state)
        benchmark::DoNotOptimize(gradient(model, X, y));
}
BENCHMARK(BM_MlpGradient);

void BM_MlpTrain(benchmark::State& state)
{
    const auto features = synthetic_features(1000);
    const auto pca = fit_pca(features, true);
    const auto scores = transform(pca, features, 5);
    MlpConfig cfg;
    cfg.epochs = 10;
    for (auto _ : state)
        benchmark::DoNotOptimize(train(init_mlp(cfg), scores, features.response));
}
BENCHMARK(BM_MlpTrain)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
