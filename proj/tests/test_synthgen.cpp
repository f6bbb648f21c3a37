#include "rul/decomposition.hpp"
#include "rul/error.hpp"
#include "rul/features.hpp"
#include "rul/synthgen.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace rul {
namespace {

SynthConfig small_config()
{
    SynthConfig cfg;
    cfg.rows_per_experiment = 400;
    return cfg;
}

TEST(Synthgen, SameSeedSameCorpus)
{
    const auto a = generate_corpus(small_config());
    const auto b = generate_corpus(small_config());
    ASSERT_EQ(a.size(), 9u);
    for (std::size_t e = 0; e < a.size(); ++e) {
        EXPECT_EQ(a[e].experiment_id, b[e].experiment_id);
        EXPECT_EQ(a[e].values, b[e].values);
    }
    auto other = small_config();
    other.seed = 43;
    EXPECT_NE(generate_corpus(other)[0].values, a[0].values);
}

TEST(Synthgen, ExperimentsIndependentOfCorpusSize)
{
    auto cfg = small_config();
    const auto full = generate_corpus(cfg);
    cfg.n_experiments = 3;
    const auto part = generate_corpus(cfg);
    EXPECT_EQ(part[2].values, full[2].values);
    EXPECT_EQ(generate_experiment(cfg, 1).values, full[1].values);
}

TEST(Synthgen, IdsSortInGenerationOrder)
{
    auto cfg = small_config();
    cfg.rows_per_experiment = 20;
    cfg.n_experiments = 12;
    const auto corpus = generate_corpus(cfg);
    EXPECT_EQ(corpus.front().experiment_id, "exp01");
    EXPECT_EQ(corpus.back().experiment_id, "exp12");
    for (std::size_t e = 1; e < corpus.size(); ++e)
        EXPECT_LT(corpus[e - 1].experiment_id, corpus[e].experiment_id);
    EXPECT_EQ(generate_corpus(small_config()).back().experiment_id, "exp9");
}

TEST(Synthgen, CleanPositiveTelemetryWithCountdownResponse)
{
    for (const auto& frame : generate_corpus(small_config())) {
        ASSERT_EQ(frame.values.rows(), 400u);
        ASSERT_EQ(frame.values.cols(), kColumnCount);
        EXPECT_TRUE(validate_frame(frame).clean());
        for (std::size_t r = 0; r < frame.values.rows(); ++r) {
            for (std::size_t c = 0; c < kColumnCount; ++c) {
                EXPECT_TRUE(std::isfinite(frame.values(r, c)));
                if (c != kResponseColumn)
                    EXPECT_GT(frame.values(r, c), 0.0);
            }
            EXPECT_GE(frame.values(r, kResponseColumn), 0.0);
            if (r > 0)
                EXPECT_LE(frame.values(r, kResponseColumn), frame.values(r - 1, kResponseColumn));
        }
    }
}

TEST(Synthgen, DefaultCorpusConcentratesVarianceInTwoComponents)
{
    std::vector<FeatureMatrix> parts;
    for (const auto& f : generate_corpus(SynthConfig{}))
        parts.push_back(featurize(f));
    const auto model = fit_pca(stack(parts), true);
    EXPECT_GE(model.cumulative_ratio()[1], 0.99);
    EXPECT_EQ(select_components(model, 0.99), 2u);
}

TEST(Synthgen, InvalidConfig)
{
    const auto expect_invalid = [](SynthConfig cfg) {
        try {
            generate_corpus(cfg);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
        }
    };
    auto cfg = small_config();
    cfg.n_experiments = 0;
    expect_invalid(cfg);
    cfg = small_config();
    cfg.rows_per_experiment = 0;
    expect_invalid(cfg);
    cfg = small_config();
    cfg.latent_factor_count = 0;
    expect_invalid(cfg);
    cfg = small_config();
    cfg.latent_factor_count = 18;
    expect_invalid(cfg);
    cfg = small_config();
    cfg.noise_scale = 0.0;
    expect_invalid(cfg);
    cfg = small_config();
    cfg.response_uniform_fraction = 1.5;
    expect_invalid(cfg);
}

} // namespace
} // namespace rul
