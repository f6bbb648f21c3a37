#include "rul/synthgen.hpp"

#include "rul/error.hpp"
#include "rul/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace rul {
namespace {

constexpr double kWanderPersistence = 0.99;
constexpr double kWanderStdDev = 0.15;
constexpr double kReserveTailMean = 0.1; // fraction of the flight duration

// Nominal magnitude of each canonical column (response slot unused).
constexpr std::array<double, kColumnCount> kColumnScale = {
    0.0,                                // remaining_time_s
    3000.0, 40.0, 40.0,                 // rpm, fmc, amc
    22.0, 22.0, 44.0, 44.0, 22.0, 22.0, // voltages
    25.0, 25.0, 30.0, 30.0,             // currents
    35.0, 35.0, 35.0, 35.0,             // temperatures
};

std::size_t dominant_factor(std::size_t column, std::size_t factors)
{
    if (factors == 1)
        return 0;
    if (factors == 2) {
        const auto role = ColumnSchema::canonical().role(column);
        return role == ColumnRole::Voltage || role == ColumnRole::Temperature ? 0 : 1;
    }
    return (column - 1) % factors;
}

// Fixed positive loadings: 1 on the dominant factor, 0.05..0.2 elsewhere.
double loading(std::size_t column, std::size_t factor, std::size_t factors)
{
    if (factor == dominant_factor(column, factors))
        return 1.0;
    return 0.05 + 0.05 * static_cast<double>((column * 7 + factor * 3) % 4);
}

std::string experiment_name(std::size_t index, std::size_t count)
{
    const auto width = std::to_string(count).size();
    auto number = std::to_string(index + 1);
    return "exp" + std::string(width - number.size(), '0') + number;
}

} // namespace

void SynthConfig::validate() const
{
    if (n_experiments == 0)
        fail(ErrorKind::InvalidConfig, "n_experiments must be positive");
    if (rows_per_experiment == 0)
        fail(ErrorKind::InvalidConfig, "rows_per_experiment must be positive");
    if (latent_factor_count == 0 || latent_factor_count > kPredictorCount)
        fail(ErrorKind::InvalidConfig, "latent_factor_count must lie in [1, 17]");
    if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
        fail(ErrorKind::InvalidConfig, "noise_scale must be positive");
    if (!(response_uniform_fraction >= 0.0 && response_uniform_fraction <= 1.0))
        fail(ErrorKind::InvalidConfig, "response_uniform_fraction must lie in [0, 1]");
    if (!(sample_interval_s > 0.0) || !std::isfinite(sample_interval_s))
        fail(ErrorKind::InvalidConfig, "sample_interval_s must be positive");
}

TelemetryFrame generate_experiment(const SynthConfig& config, std::size_t index)
{
    config.validate();
    const std::size_t factors = config.latent_factor_count;
    const std::size_t rows = config.rows_per_experiment;
    Rng rng(config.seed ^ static_cast<std::uint64_t>(index));

    // The first factor's level varies little between flights; the others
    // carry most of the flight-to-flight load differences.
    std::vector<double> level(factors);
    for (std::size_t k = 0; k < factors; ++k)
        level[k] = k == 0 ? rng.uniform(0.9, 1.1) : rng.uniform(0.6, 1.4);

    const double duration = static_cast<double>(rows - 1) * config.sample_interval_s;
    const double reserve = rng.uniform() < config.response_uniform_fraction
                               ? rng.uniform(0.0, 0.02) * duration
                               : rng.exponential(kReserveTailMean * duration);

    const double innovation = kWanderStdDev * std::sqrt(1.0 - kWanderPersistence * kWanderPersistence);
    std::vector<double> wander(factors);
    for (auto& w : wander)
        w = kWanderStdDev * rng.normal();

    std::array<double, kColumnCount> weight_total{};
    for (std::size_t c = 1; c < kColumnCount; ++c)
        for (std::size_t k = 0; k < factors; ++k)
            weight_total[c] += loading(c, k, factors);

    TelemetryFrame frame;
    frame.experiment_id = experiment_name(index, config.n_experiments);
    frame.sample_interval_s = config.sample_interval_s;
    frame.values = Matrix(rows, kColumnCount);

    std::vector<double> latent(factors);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < factors; ++k) {
            wander[k] = kWanderPersistence * wander[k] + innovation * rng.normal();
            latent[k] = level[k] * std::max(0.2, 1.0 + wander[k]);
        }
        frame.values(r, kResponseColumn) =
            reserve + static_cast<double>(rows - 1 - r) * config.sample_interval_s;
        for (std::size_t c = 1; c < kColumnCount; ++c) {
            double mix = 0.0;
            for (std::size_t k = 0; k < factors; ++k)
                mix += loading(c, k, factors) * latent[k];
            const double scale = kColumnScale[c];
            const double value = scale * (mix / weight_total[c] + config.noise_scale * rng.normal());
            frame.values(r, c) = std::max(value, 1e-3 * scale);
        }
    }
    return frame;
}

Corpus generate_corpus(const SynthConfig& config)
{
    config.validate();
    Corpus corpus;
    corpus.reserve(config.n_experiments);
    for (std::size_t e = 0; e < config.n_experiments; ++e)
        corpus.push_back(generate_experiment(config, e));
    return corpus;
}

} // namespace rul
