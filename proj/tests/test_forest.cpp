#include "rul/error.hpp"
#include "rul/forest.hpp"
#include "rul/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace rul {
namespace {

std::vector<std::size_t> all_features(std::size_t p)
{
    std::vector<std::size_t> f(p);
    std::iota(f.begin(), f.end(), std::size_t{0});
    return f;
}

std::vector<std::size_t> all_rows(std::size_t n)
{
    return all_features(n);
}

struct Fixture {
    Matrix X;
    std::vector<double> y;
};

Fixture random_fixture(std::size_t rows, std::size_t cols, std::uint64_t seed, bool integer_grid)
{
    Rng rng(seed);
    Fixture f{Matrix(rows, cols), std::vector<double>(rows)};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c)
            f.X(r, c) = integer_grid ? static_cast<double>(rng.index(8)) : rng.normal();
        f.y[r] = 3.0 * f.X(r, 0) - (cols > 1 ? f.X(r, 1) * f.X(r, 1) : 0.0) + 0.1 * rng.normal();
    }
    return f;
}

TEST(BestSplit, StepFunction)
{
    Matrix X(4, 1);
    for (std::size_t r = 0; r < 4; ++r)
        X(r, 0) = static_cast<double>(r);
    const std::vector<double> y{0, 0, 10, 10};
    const auto split = best_split(X, y, all_features(1), 1);
    ASSERT_TRUE(split.has_value());
    EXPECT_EQ(split->feature, 0u);
    EXPECT_EQ(split->threshold, 1.5);
    EXPECT_NEAR(split->gain, 25.0, 1e-12);
}

TEST(BestSplit, ConstantTargetHasNoSplit)
{
    const auto f = random_fixture(20, 3, 1, false);
    const std::vector<double> y(20, 4.0);
    EXPECT_FALSE(best_split(f.X, y, all_features(3), 1).has_value());
}

TEST(BestSplit, MinLeafBlocksSplits)
{
    Matrix X(4, 1);
    for (std::size_t r = 0; r < 4; ++r)
        X(r, 0) = static_cast<double>(r);
    const std::vector<double> y{0, 0, 10, 10};
    EXPECT_TRUE(best_split(X, y, all_features(1), 2).has_value());
    EXPECT_FALSE(best_split(X, y, all_features(1), 3).has_value());
}

TEST(BestSplit, PicksSeparatingFeature)
{
    Rng rng(9);
    Matrix X(40, 3);
    std::vector<double> y(40);
    for (std::size_t r = 0; r < 40; ++r) {
        X(r, 0) = rng.normal();
        X(r, 1) = static_cast<double>(r % 2);
        X(r, 2) = rng.normal();
        y[r] = X(r, 1) > 0.5 ? 7.0 : -7.0;
    }
    const auto split = best_split(X, y, all_features(3), 1);
    ASSERT_TRUE(split.has_value());
    EXPECT_EQ(split->feature, 1u);
    EXPECT_EQ(split->threshold, 0.5);
}

TEST(BestSplit, MatchesExhaustiveOracle)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto f = random_fixture(10 + seed * 3, 1 + seed % 3, seed, seed % 2 == 0);
        const auto rows = all_rows(f.X.rows());
        const auto got = best_split(f.X, f.y, rows, all_features(f.X.cols()), 2);
        const auto want = oracle::exhaustive_split(f.X, f.y, rows, 2);
        ASSERT_EQ(got.has_value(), want.found);
        if (!want.found)
            continue;
        EXPECT_EQ(got->feature, want.feature) << "seed " << seed;
        EXPECT_EQ(got->threshold, want.threshold) << "seed " << seed;
        EXPECT_NEAR(got->gain, want.gain, 1e-9 * std::max(1.0, want.gain));
    }
}

TEST(GrowTree, SingleTreeMatchesCartOracle)
{
    const auto f = random_fixture(50, 2, 77, false);
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.max_depth = 6;
    cfg.min_samples_leaf = 3;
    const auto model = fit_forest(f.X, f.y, cfg, 1);
    const oracle::CartOracle ref(f.X, f.y, 6, 3);
    const auto probe = random_fixture(200, 2, 78, false);
    for (std::size_t r = 0; r < probe.X.rows(); ++r)
        EXPECT_EQ(model.trees[0].predict(probe.X.row(r)), ref.predict(probe.X.row(r)));
}

TEST(FitForest, ConstantTarget)
{
    const auto f = random_fixture(30, 2, 3, false);
    const std::vector<double> y(30, -2.5);
    ForestConfig cfg;
    cfg.n_trees = 7;
    cfg.seed = 3;
    const auto model = fit_forest(f.X, y, cfg, 1);
    for (const auto& tree : model.trees)
        EXPECT_EQ(tree.nodes.size(), 1u);
    for (double p : predict_forest(model, f.X))
        EXPECT_EQ(p, -2.5);
}

TEST(FitForest, DeterministicAcrossThreadCounts)
{
    const auto f = random_fixture(300, 2, 11, false);
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 1234;
    cfg.feature_subsample = 1;
    const auto a = predict_forest(fit_forest(f.X, f.y, cfg, 1), f.X);
    const auto b = predict_forest(fit_forest(f.X, f.y, cfg, 4), f.X);
    const auto c = predict_forest(fit_forest(f.X, f.y, cfg, 1), f.X);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    cfg.seed = 1235;
    EXPECT_NE(a, predict_forest(fit_forest(f.X, f.y, cfg, 1), f.X));
}

TEST(FitForest, PredictionWithinTrainingRange)
{
    const auto f = random_fixture(200, 2, 5, false);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 5;
    const auto model = fit_forest(f.X, f.y, cfg, 2);
    const auto [lo, hi] = std::minmax_element(f.y.begin(), f.y.end());
    Rng rng(6);
    Matrix probe(500, 2);
    for (double& v : probe.data())
        v = 10.0 * rng.normal();
    for (double p : predict_forest(model, probe)) {
        EXPECT_GE(p, *lo);
        EXPECT_LE(p, *hi);
    }
}

TEST(FitForest, IdenticalTreesAverageToOneTree)
{
    const auto f = random_fixture(60, 2, 15, false);
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.bootstrap = false;
    cfg.min_samples_leaf = 2;
    const auto model = fit_forest(f.X, f.y, cfg, 1);
    const auto pred = predict_forest(model, f.X);
    for (std::size_t r = 0; r < f.X.rows(); ++r)
        EXPECT_EQ(pred[r], model.trees[0].predict(f.X.row(r)));
}

TEST(FitForest, StructuralInvariants)
{
    const auto f = random_fixture(400, 3, 21, false);
    ForestConfig cfg;
    cfg.n_trees = 8;
    cfg.max_depth = 5;
    cfg.min_samples_leaf = 7;
    cfg.seed = 2;
    const auto model = fit_forest(f.X, f.y, cfg, 1);
    for (const auto& tree : model.trees) {
        EXPECT_LE(tree.depth(), 5u);
        for (const auto& node : tree.nodes)
            if (node.is_leaf())
                EXPECT_GE(node.samples, 7u);
    }
}

TEST(FitForest, Errors)
{
    const auto f = random_fixture(10, 2, 1, false);
    ForestConfig cfg;
    const std::vector<double> short_y(9, 1.0);
    try {
        fit_forest(f.X, short_y, cfg, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    try {
        fit_forest(Matrix(0, 2), std::vector<double>{}, cfg, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
    }
    cfg.n_trees = 0;
    EXPECT_THROW(fit_forest(f.X, f.y, cfg, 1), Error);
    const auto model = fit_forest(f.X, f.y, ForestConfig{}, 1);
    EXPECT_THROW(predict_forest(model, Matrix(2, 3)), Error);
}

} // namespace
} // namespace rul
