#pragma once

#include "rul/matrix.hpp"
#include "rul/telemetry.hpp"

#include <span>
#include <string>
#include <vector>

namespace rul {

/// Engineered predictors (one row per clean telemetry row) and the aligned
/// remaining-time response.
struct FeatureMatrix {
    std::string experiment_id;
    std::vector<std::string> column_names;
    Matrix features; // rows x column_names.size()
    std::vector<double> response;

    std::size_t row_count() const noexcept { return features.rows(); }
};

/// Running integral of a uniformly sampled series:
/// out[k] = interval * sum(series[0..k]), accumulated with compensation.
std::vector<double> cumulative_auc(std::span<const double> series, double sample_interval_s);

/// Replaces every predictor column of a clean frame with its cumulative AUC.
/// History starts at zero for each frame.
FeatureMatrix featurize(const TelemetryFrame& frame);

/// Reinterprets a frame whose predictors are already engineered (as written
/// by `write_features`).
FeatureMatrix as_feature_matrix(const TelemetryFrame& engineered);

/// Writes in the telemetry CSV layout so engineered files reload unchanged.
void write_features(const FeatureMatrix& features, const std::filesystem::path& path,
                    double sample_interval_s);

/// Row-wise concatenation; all inputs must share column names.
FeatureMatrix stack(std::span<const FeatureMatrix> parts, std::string experiment_id = "pooled");

struct CorrelationMatrix {
    std::vector<std::string> column_names;
    Matrix values;
};

/// Pearson correlation of every column pair. Throws TooFewRows below two rows
/// and ZeroVarianceColumn naming the first constant column.
CorrelationMatrix correlation(const FeatureMatrix& matrix);

void write_correlation(const CorrelationMatrix& corr, const std::filesystem::path& path);

} // namespace rul
