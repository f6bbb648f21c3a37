#include "rul/error.hpp"
#include "rul/evaluation.hpp"
#include "rul/synthgen.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

namespace rul {
namespace {

Corpus tiny_corpus(std::size_t experiments = 4, std::size_t rows = 300)
{
    SynthConfig cfg;
    cfg.n_experiments = experiments;
    cfg.rows_per_experiment = rows;
    cfg.seed = 17;
    return generate_corpus(cfg);
}

ComparisonConfig fast_config()
{
    ComparisonConfig cfg;
    cfg.forest.n_trees = 5;
    cfg.mlp.epochs = 5;
    cfg.threads = 1;
    return cfg;
}

TEST(Split, HoldsOutWholeExperiments)
{
    const auto corpus = tiny_corpus(3, 20);
    const auto plan = split_by_experiment(corpus, "exp2");
    EXPECT_EQ(plan.train_ids, (std::vector<std::string>{"exp1", "exp3"}));
    EXPECT_EQ(plan.test_ids, (std::vector<std::string>{"exp2"}));
    EXPECT_EQ(default_holdout(corpus), "exp3");

    const auto nine = tiny_corpus(9, 10);
    const auto last = split_by_experiment(nine, "exp9");
    EXPECT_EQ(last.train_ids.size(), 8u);
    EXPECT_EQ(last.test_ids.size(), 1u);
    const auto two = split_by_experiment(tiny_corpus(2, 10), "exp1");
    EXPECT_EQ(two.train_ids, (std::vector<std::string>{"exp2"}));
    EXPECT_EQ(two.test_ids, (std::vector<std::string>{"exp1"}));
}

TEST(Split, Errors)
{
    const auto corpus = tiny_corpus(3, 20);
    try {
        split_by_experiment(corpus, "exp7");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownExperiment);
    }
    const std::vector<std::string> everything{"exp1", "exp2", "exp3"};
    EXPECT_THROW(split_by_experiment(corpus, everything), Error);
    EXPECT_THROW(split_by_experiment(corpus, std::vector<std::string>{}), Error);
}

TEST(Mse, Examples)
{
    const std::vector<double> a{1, 2, 3}, b{1, 2, 3}, c{2, 2, 5};
    EXPECT_EQ(mse(a, b), 0.0);
    EXPECT_NEAR(mse(c, a), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(mean_predictor_mse(std::vector<double>{0, 2}), 1.0, 1e-15);
    EXPECT_THROW(mse(a, std::vector<double>{1, 2}), Error);
    EXPECT_THROW(mse(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(Mse, MatchesLongDoubleLoop)
{
    std::vector<double> p(1000), q(1000);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::sin(static_cast<double>(i)) * 1e4;
        q[i] = std::cos(static_cast<double>(i)) * 1e4;
    }
    long double acc = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i)
        acc += (static_cast<long double>(p[i]) - q[i]) * (static_cast<long double>(p[i]) - q[i]);
    const double want = static_cast<double>(acc / 1000.0L);
    EXPECT_NEAR(mse(p, q), want, 1e-12 * want);
}

TEST(Comparison, ProducesFiveFiniteReports)
{
    const auto corpus = tiny_corpus();
    const auto result = run_comparison(corpus, fast_config());
    ASSERT_EQ(result.reports.size(), 5u);
    const std::vector<std::string> names{"RF", "NN-[3]", "NN-[5]", "NN-[5,1]", "NN-[5,3]"};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& r = result.reports[i];
        EXPECT_EQ(r.model_name, names[i]);
        EXPECT_TRUE(std::isfinite(r.test_mse));
        EXPECT_TRUE(std::isfinite(r.train_mse));
        EXPECT_GE(r.training_seconds, 0.0);
        EXPECT_EQ(r.actual.size(), 300u);
        EXPECT_EQ(r.predicted.size(), 300u);
        EXPECT_EQ(r.input_dim, i == 0 ? 2u : 5u);
    }
    EXPECT_EQ(result.split.test_ids, (std::vector<std::string>{"exp4"}));
    EXPECT_EQ(result.pca.fit_rows, 900u);

    const auto table = format_comparison_table(result);
    for (const auto& n : names)
        EXPECT_NE(table.find(n), std::string::npos);
}

TEST(Comparison, PcaSeesOnlyTrainingExperiments)
{
    auto corpus = tiny_corpus();
    const auto base = run_comparison(corpus, fast_config());
    for (std::size_t r = 0; r < corpus[3].values.rows(); ++r)
        for (std::size_t c = 1; c < kColumnCount; ++c)
            corpus[3].values(r, c) *= 3.0;
    const auto mutated = run_comparison(corpus, fast_config());
    EXPECT_EQ(mutated.pca.components, base.pca.components);
    EXPECT_EQ(mutated.pca.feature_means, base.pca.feature_means);
    for (std::size_t i = 0; i < base.networks.size(); ++i) {
        EXPECT_EQ(mutated.networks[i].input_scaler.mean, base.networks[i].input_scaler.mean);
        EXPECT_EQ(mutated.networks[i].input_scaler.scale, base.networks[i].input_scaler.scale);
    }
    EXPECT_EQ(mutated.reports[0].train_mse, base.reports[0].train_mse);
}

TEST(Comparison, Deterministic)
{
    const auto corpus = tiny_corpus();
    const auto a = run_comparison(corpus, fast_config());
    const auto b = run_comparison(corpus, fast_config());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
        EXPECT_EQ(a.reports[i].test_mse, b.reports[i].test_mse);
        EXPECT_EQ(a.reports[i].predicted, b.reports[i].predicted);
    }
}

TEST(Comparison, ErrorsCarryStage)
{
    auto cfg = fast_config();
    cfg.pca_k_nn = 40;
    try {
        run_comparison(tiny_corpus(), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::KOutOfRange);
        EXPECT_FALSE(e.stage().empty());
    }
}

TEST(FitSeries, RoundTrip)
{
    test::TempDir dir;
    EvalReport report;
    report.model_name = "RF";
    report.actual = {1.0, 0.1, 1e10 / 3.0};
    report.predicted = {0.9, -2.5e-7, 12345.678};
    export_fit_series(report, dir / "fit.csv");
    const auto series = read_fit_series(dir / "fit.csv");
    ASSERT_EQ(series.actual.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(series.actual[i], report.actual[i], 1e-9);
        EXPECT_NEAR(series.predicted[i], report.predicted[i], 1e-9);
    }
    EXPECT_EQ(model_slug("NN-[5,3]"), "nn_5_3");
    EXPECT_EQ(model_slug("RF"), "rf");
}

TEST(ComparisonCsv, HeaderAndRows)
{
    test::TempDir dir;
    const auto result = run_comparison(tiny_corpus(3, 200), fast_config());
    write_comparison_csv(result, dir / "c.csv");
    std::ifstream in(dir / "c.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "Model,Test MSE,Train MSE,Computational Time (s),Input Dim,Robustness");
    std::size_t rows = 0;
    while (std::getline(in, line))
        rows += line.empty() ? 0 : 1;
    EXPECT_EQ(rows, 5u);
}

} // namespace
} // namespace rul
