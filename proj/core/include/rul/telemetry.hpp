#pragma once

#include "rul/matrix.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rul {

enum class ColumnRole { Response, State, Voltage, Current, Temperature };

inline constexpr std::size_t kColumnCount = 18;
inline constexpr std::size_t kPredictorCount = 17;
inline constexpr std::size_t kResponseColumn = 0;

/// Canonical experiment schema: the remaining-flight-time response followed
/// by 3 aircraft-state, 6 voltage, 4 current and 4 temperature predictors.
class ColumnSchema {
public:
    static const ColumnSchema& canonical();

    std::span<const std::string_view> names() const noexcept { return names_; }
    std::string_view name(std::size_t column) const noexcept { return names_[column]; }
    ColumnRole role(std::size_t column) const noexcept { return roles_[column]; }
    std::string_view unit(std::size_t column) const noexcept;

    /// Predictor names in column order (everything except the response).
    std::vector<std::string> predictor_names() const;

    /// Maps a header cell to a canonical column. Accepts the short names
    /// case-insensitively plus the long descriptive aliases.
    std::optional<std::size_t> resolve(std::string_view header) const;

private:
    ColumnSchema();

    std::array<std::string_view, kColumnCount> names_;
    std::array<ColumnRole, kColumnCount> roles_;
};

/// One experiment's time-ordered table. Rows are uniformly sampled at
/// `sample_interval_s`; columns follow `ColumnSchema::canonical()`. Missing
/// cells are stored as NaN until the frame is cleaned.
struct TelemetryFrame {
    std::string experiment_id;
    double sample_interval_s = 1.0;
    Matrix values; // rows x kColumnCount

    std::size_t row_count() const noexcept { return values.rows(); }
    std::vector<double> column(std::size_t c) const { return values.column(c); }
    std::vector<double> response() const { return values.column(kResponseColumn); }
};

struct ColumnStats {
    std::size_t finite_count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct ValidationReport {
    std::string experiment_id;
    std::size_t row_count = 0;
    std::size_t missing_cells = 0;
    std::size_t non_finite_cells = 0;
    std::size_t negative_response_rows = 0;
    std::array<ColumnStats, kColumnCount> columns{};

    bool clean() const noexcept
    {
        return missing_cells == 0 && non_finite_cells == 0 && negative_response_rows == 0;
    }
};

enum class CleaningPolicy { Drop, Interpolate };

std::string_view to_string(CleaningPolicy policy) noexcept;
CleaningPolicy parse_cleaning_policy(std::string_view text);

/// Reads one experiment CSV. The experiment id is the file stem; cells that
/// are empty, "NaN" or unparseable load as missing.
TelemetryFrame load_experiment(const std::filesystem::path& path, double sample_interval_s = 1.0,
                               const ColumnSchema& schema = ColumnSchema::canonical());

/// Parses CSV text that is already in memory.
TelemetryFrame parse_experiment(std::string_view csv_text, std::string experiment_id,
                                double sample_interval_s = 1.0,
                                const ColumnSchema& schema = ColumnSchema::canonical());

void write_experiment(const TelemetryFrame& frame, const std::filesystem::path& path);
std::string format_experiment(const TelemetryFrame& frame);

ValidationReport validate_frame(const TelemetryFrame& frame);

/// Throws AllRowsDropped when nothing survives.
TelemetryFrame clean_frame(const TelemetryFrame& frame,
                           CleaningPolicy policy = CleaningPolicy::Interpolate);

using Corpus = std::vector<TelemetryFrame>;

/// Every *.csv file in `directory`, sorted by experiment id.
Corpus load_corpus(const std::filesystem::path& directory, double sample_interval_s = 1.0);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

} // namespace rul
