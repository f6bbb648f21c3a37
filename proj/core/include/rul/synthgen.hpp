#pragma once

#include "rul/telemetry.hpp"

#include <cstddef>
#include <cstdint>

namespace rul {

/// Seeded synthetic flight corpus.
///
/// Every predictor is a positive mixture of `latent_factor_count` shared load
/// signals (slowly wandering around an experiment-specific level) plus
/// independent noise of relative size `noise_scale`. Predictors fall into
/// clusters, each dominated by one latent factor, so the cumulative features
/// are all positively correlated and their variance concentrates in the
/// first `latent_factor_count` principal components. With zero noise the
/// engineered features have rank exactly `latent_factor_count`.
///
/// remaining_time_s is a linear countdown that reaches a small residual at
/// the last row. A `response_uniform_fraction` share of experiments end near
/// zero; the rest keep an exponentially distributed reserve, which gives the
/// pooled response a flat lower range with a decaying upper tail.
///
/// With the default noise, temperatures stay in roughly 10-80 degC and
/// voltages stay positive.
struct SynthConfig {
    std::size_t n_experiments = 9;
    std::size_t rows_per_experiment = 5000;
    std::uint64_t seed = 42;
    std::size_t latent_factor_count = 2;
    double noise_scale = 0.02;
    double response_uniform_fraction = 0.6;
    double sample_interval_s = 1.0;

    void validate() const;
};

/// Experiment e is drawn from a stream seeded with seed ^ e, so experiments
/// are independent of generation order. Ids are "exp1".."expN", zero padded
/// so lexical order matches generation order.
Corpus generate_corpus(const SynthConfig& config);

TelemetryFrame generate_experiment(const SynthConfig& config, std::size_t index);

} // namespace rul
