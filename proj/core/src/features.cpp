#include "rul/features.hpp"

#include "rul/error.hpp"
#include "rul/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace rul {

std::vector<double> cumulative_auc(std::span<const double> series, double sample_interval_s)
{
    if (series.empty())
        fail(ErrorKind::EmptySeries, "cumulative AUC of an empty series");
    if (!(sample_interval_s > 0.0) || !std::isfinite(sample_interval_s))
        fail(ErrorKind::InvalidConfig, "sample interval must be positive");

    std::vector<double> out(series.size());
    CompensatedSum acc;
    for (std::size_t k = 0; k < series.size(); ++k) {
        acc.add(series[k]);
        out[k] = sample_interval_s * acc.value();
    }
    return out;
}

FeatureMatrix featurize(const TelemetryFrame& frame)
{
    const std::size_t n = frame.row_count();
    if (n == 0)
        fail(ErrorKind::EmptySeries, frame.experiment_id + ": frame has no rows");
    for (double v : frame.values.data())
        if (!std::isfinite(v))
            fail(ErrorKind::NonFiniteValue, frame.experiment_id + ": featurize needs a cleaned frame");

    FeatureMatrix out;
    out.experiment_id = frame.experiment_id;
    out.column_names = ColumnSchema::canonical().predictor_names();
    out.features = Matrix(n, kPredictorCount);
    out.response = frame.response();

    std::size_t target = 0;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (c == kResponseColumn)
            continue;
        const auto raw = frame.column(c);
        const auto integrated = cumulative_auc(raw, frame.sample_interval_s);
        for (std::size_t r = 0; r < n; ++r)
            out.features(r, target) = integrated[r];
        ++target;
    }
    return out;
}

FeatureMatrix as_feature_matrix(const TelemetryFrame& engineered)
{
    FeatureMatrix out;
    out.experiment_id = engineered.experiment_id;
    out.column_names = ColumnSchema::canonical().predictor_names();
    out.features = Matrix(engineered.row_count(), kPredictorCount);
    out.response = engineered.response();
    for (std::size_t r = 0; r < engineered.row_count(); ++r)
        for (std::size_t c = 1; c < kColumnCount; ++c)
            out.features(r, c - 1) = engineered.values(r, c);
    return out;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path,
                    double sample_interval_s)
{
    if (features.features.cols() != kPredictorCount)
        fail(ErrorKind::SchemaMismatch, "engineered CSV needs all 17 predictors");
    TelemetryFrame frame;
    frame.experiment_id = features.experiment_id;
    frame.sample_interval_s = sample_interval_s;
    frame.values = Matrix(features.row_count(), kColumnCount);
    for (std::size_t r = 0; r < features.row_count(); ++r) {
        frame.values(r, kResponseColumn) = features.response[r];
        for (std::size_t c = 0; c < kPredictorCount; ++c)
            frame.values(r, c + 1) = features.features(r, c);
    }
    write_experiment(frame, path);
}

FeatureMatrix stack(std::span<const FeatureMatrix> parts, std::string experiment_id)
{
    FeatureMatrix out;
    out.experiment_id = std::move(experiment_id);
    if (parts.empty())
        return out;
    out.column_names = parts.front().column_names;
    std::size_t total = 0;
    for (const auto& part : parts) {
        if (part.column_names != out.column_names)
            fail(ErrorKind::SchemaMismatch, "cannot stack " + part.experiment_id + ": column mismatch");
        total += part.row_count();
    }
    out.features = Matrix(total, out.column_names.size());
    out.response.reserve(total);
    std::size_t row = 0;
    for (const auto& part : parts) {
        for (std::size_t r = 0; r < part.row_count(); ++r, ++row) {
            const auto src = part.features.row(r);
            std::copy(src.begin(), src.end(), out.features.row(row).begin());
        }
        out.response.insert(out.response.end(), part.response.begin(), part.response.end());
    }
    return out;
}

CorrelationMatrix correlation(const FeatureMatrix& matrix)
{
    const auto& x = matrix.features;
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (n < 2)
        fail(ErrorKind::TooFewRows, "correlation needs at least two rows");

    std::vector<double> means(p);
    for (std::size_t c = 0; c < p; ++c) {
        CompensatedSum acc;
        for (std::size_t r = 0; r < n; ++r)
            acc.add(x(r, c));
        means[c] = acc.value() / static_cast<double>(n);
    }

    std::vector<CompensatedSum> cross(p * p);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        for (std::size_t i = 0; i < p; ++i) {
            const double di = row[i] - means[i];
            for (std::size_t j = i; j < p; ++j)
                cross[i * p + j].add(di * (row[j] - means[j]));
        }
    }

    std::vector<double> sd(p);
    for (std::size_t c = 0; c < p; ++c) {
        const double ss = cross[c * p + c].value();
        // Deviations of a constant column are pure rounding noise.
        double magnitude = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            magnitude = std::max(magnitude, std::abs(x(r, c)));
        const double noise = 4.0 * std::numeric_limits<double>::epsilon() * magnitude;
        if (!(ss > static_cast<double>(n) * noise * noise)) {
            const auto name = c < matrix.column_names.size() ? matrix.column_names[c]
                                                             : "#" + std::to_string(c);
            fail(ErrorKind::ZeroVarianceColumn, "column '" + name + "' has zero variance");
        }
        sd[c] = std::sqrt(ss);
    }

    CorrelationMatrix out;
    out.column_names = matrix.column_names;
    out.values = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        out.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            const double r = std::clamp(cross[i * p + j].value() / (sd[i] * sd[j]), -1.0, 1.0);
            out.values(i, j) = r;
            out.values(j, i) = r;
        }
    }
    return out;
}

void write_correlation(const CorrelationMatrix& corr, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::IoError, "cannot write " + path.string());
    out << "column";
    for (const auto& name : corr.column_names)
        out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < corr.values.rows(); ++i) {
        out << corr.column_names[i];
        for (std::size_t j = 0; j < corr.values.cols(); ++j)
            out << ',' << format_double(corr.values(i, j));
        out << '\n';
    }
}

} // namespace rul
