#include "rul/telemetry.hpp"

#include "rul/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace rul {
namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct Alias {
    std::string_view key; // lower-case alphanumerics only
    std::size_t column;
};

// Long descriptive names as they appear in the aircraft's battery logs.
constexpr Alias kAliases[] = {
    {"remainingflyingtime", 0},
    {"remainingflyingtimeestimate", 0},
    {"remainingflighttime", 0},
    {"remainingtime", 0},
    {"revolutionsperminute", 1},
    {"forwardmotorcontrollersensor", 2},
    {"forwardmotorcontrolledsensor", 2},
    {"aftermotorcontrollersensor", 3},
    {"aftermotorcontrolledsensor", 3},
    {"lowerleftfrontbatteryvoltage", 4},
    {"upperleftafterbatteryvoltage", 5},
    {"lowerrightfrontseriescombinedvoltage", 6},
    {"upperrightafterseriescombinedvoltage", 7},
    {"lowerrightfrontbatteryvoltage", 8},
    {"upperrightafterbatteryvoltage", 9},
    {"lowerleftforwardbatterycurrent", 10},
    {"lowerleftfrontbatterycurrent", 10},
    {"upperleftafterbatterycurrent", 11},
    {"lowerrightafterseriescombinedcurrent", 12},
    {"lowerrightfrontseriescombinedcurrent", 12},
    {"upperrightafterseriescombinedcurrent", 13},
    {"lowerleftfronttemperature", 14},
    {"upperleftaftertemperature", 15},
    {"lowerrightfrontseriescombinedtemperature", 16},
    {"upperrightafterseriescombinedtemperature", 17},
};

std::string normalize_header(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c))
            out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell)
{
    if (cell.empty())
        return kMissing;
    if (cell.front() == '+')
        cell.remove_prefix(1);
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        return kMissing;
    return value;
}

bool is_defect(const Matrix& values, std::size_t r, std::size_t c)
{
    const double v = values(r, c);
    if (!std::isfinite(v))
        return true;
    return c == kResponseColumn && v < 0.0;
}

} // namespace

ColumnSchema::ColumnSchema()
    : names_{"remaining_time_s", "rpm",    "fmc",    "amc",    "llf20v", "ula20v",
             "lrf40v",           "ura40v", "lrf20v", "ura20v", "llf20c", "ula20c",
             "lrf40c",           "ura40c", "llf20t", "ula20t", "lrf40t", "ura40t"}
{
    roles_[0] = ColumnRole::Response;
    for (std::size_t c = 1; c <= 3; ++c)
        roles_[c] = ColumnRole::State;
    for (std::size_t c = 4; c <= 9; ++c)
        roles_[c] = ColumnRole::Voltage;
    for (std::size_t c = 10; c <= 13; ++c)
        roles_[c] = ColumnRole::Current;
    for (std::size_t c = 14; c <= 17; ++c)
        roles_[c] = ColumnRole::Temperature;
}

const ColumnSchema& ColumnSchema::canonical()
{
    static const ColumnSchema schema;
    return schema;
}

std::string_view ColumnSchema::unit(std::size_t column) const noexcept
{
    switch (roles_[column]) {
    case ColumnRole::Response: return "s";
    case ColumnRole::State: return column == 1 ? "rev/min" : "sensor units";
    case ColumnRole::Voltage: return "V";
    case ColumnRole::Current: return "A";
    case ColumnRole::Temperature: return "degC";
    }
    return "";
}

std::vector<std::string> ColumnSchema::predictor_names() const
{
    std::vector<std::string> out;
    for (std::size_t c = 0; c < kColumnCount; ++c)
        if (c != kResponseColumn)
            out.emplace_back(names_[c]);
    return out;
}

std::optional<std::size_t> ColumnSchema::resolve(std::string_view header) const
{
    const auto key = normalize_header(header);
    for (std::size_t c = 0; c < kColumnCount; ++c)
        if (normalize_header(names_[c]) == key)
            return c;
    for (const auto& alias : kAliases)
        if (alias.key == key)
            return alias.column;
    return std::nullopt;
}

std::string_view to_string(CleaningPolicy policy) noexcept
{
    return policy == CleaningPolicy::Drop ? "drop" : "interpolate";
}

CleaningPolicy parse_cleaning_policy(std::string_view text)
{
    if (text == "drop")
        return CleaningPolicy::Drop;
    if (text == "interpolate")
        return CleaningPolicy::Interpolate;
    fail(ErrorKind::InvalidConfig, "unknown cleaning policy '" + std::string(text) + "'");
}

TelemetryFrame parse_experiment(std::string_view text, std::string experiment_id,
                                double sample_interval_s, const ColumnSchema& schema)
{
    if (!(sample_interval_s > 0.0) || !std::isfinite(sample_interval_s))
        fail(ErrorKind::InvalidConfig, "sample interval must be positive");

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (!trim(line).empty())
            lines.push_back(line);
        start = nl + 1;
    }
    if (lines.empty())
        fail(ErrorKind::EmptyFile, experiment_id + ": no header row");
    if (lines.front().starts_with("\xEF\xBB\xBF"))
        lines.front().remove_prefix(3);

    const auto header = split_cells(lines.front());
    std::vector<std::optional<std::size_t>> mapping;
    std::array<bool, kColumnCount> seen{};
    for (auto cell : header) {
        auto column = schema.resolve(cell);
        if (column) {
            if (seen[*column])
                fail(ErrorKind::ColumnCountMismatch,
                     experiment_id + ": duplicate column '" + std::string(cell) + "'");
            seen[*column] = true;
        }
        mapping.push_back(column);
    }
    for (std::size_t c = 0; c < kColumnCount; ++c)
        if (!seen[c])
            fail(ErrorKind::MissingColumn,
                 experiment_id + ": header lacks column '" + std::string(schema.name(c)) + "'");
    if (header.size() != kColumnCount)
        fail(ErrorKind::ColumnCountMismatch, experiment_id + ": header has " +
                                                 std::to_string(header.size()) + " columns, expected " +
                                                 std::to_string(kColumnCount));
    if (lines.size() < 2)
        fail(ErrorKind::EmptyFile, experiment_id + ": no data rows");

    TelemetryFrame frame;
    frame.experiment_id = std::move(experiment_id);
    frame.sample_interval_s = sample_interval_s;
    frame.values = Matrix(lines.size() - 1, kColumnCount);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        if (cells.size() != header.size())
            fail(ErrorKind::ColumnCountMismatch, frame.experiment_id + ": line " + std::to_string(i + 1) +
                                                     " has " + std::to_string(cells.size()) +
                                                     " cells, expected " + std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j)
            frame.values(i - 1, *mapping[j]) = parse_cell(cells[j]);
    }
    return frame;
}

TelemetryFrame load_experiment(const std::filesystem::path& path, double sample_interval_s,
                               const ColumnSchema& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment(buffer.str(), path.stem().string(), sample_interval_s, schema);
}

std::string format_double(double value)
{
    if (std::isnan(value))
        return "NaN";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string format_experiment(const TelemetryFrame& frame)
{
    const auto& schema = ColumnSchema::canonical();
    std::string out;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (c)
            out.push_back(',');
        out.append(schema.name(c));
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            if (c)
                out.push_back(',');
            out += format_double(frame.values(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

void write_experiment(const TelemetryFrame& frame, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::IoError, "cannot write " + path.string());
    out << format_experiment(frame);
    if (!out)
        fail(ErrorKind::IoError, "write failed for " + path.string());
}

ValidationReport validate_frame(const TelemetryFrame& frame)
{
    ValidationReport report;
    report.experiment_id = frame.experiment_id;
    report.row_count = frame.row_count();

    std::array<double, kColumnCount> sums{};
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            const double v = frame.values(r, c);
            if (std::isnan(v)) {
                ++report.missing_cells;
                continue;
            }
            if (!std::isfinite(v)) {
                ++report.non_finite_cells;
                continue;
            }
            auto& stats = report.columns[c];
            if (stats.finite_count == 0) {
                stats.min = stats.max = v;
            } else {
                stats.min = std::min(stats.min, v);
                stats.max = std::max(stats.max, v);
            }
            ++stats.finite_count;
            sums[c] += v;
        }
        const double response = frame.values(r, kResponseColumn);
        if (std::isfinite(response) && response < 0.0)
            ++report.negative_response_rows;
    }
    for (std::size_t c = 0; c < kColumnCount; ++c)
        if (report.columns[c].finite_count)
            report.columns[c].mean = sums[c] / static_cast<double>(report.columns[c].finite_count);
    return report;
}

TelemetryFrame clean_frame(const TelemetryFrame& frame, CleaningPolicy policy)
{
    const auto& in = frame.values;
    const std::size_t n = in.rows();

    TelemetryFrame out;
    out.experiment_id = frame.experiment_id;
    out.sample_interval_s = frame.sample_interval_s;

    if (policy == CleaningPolicy::Drop) {
        for (std::size_t r = 0; r < n; ++r) {
            bool ok = true;
            for (std::size_t c = 0; c < kColumnCount && ok; ++c)
                ok = !is_defect(in, r, c);
            if (ok)
                out.values.append_row(in.row(r));
        }
        if (out.values.rows() == 0)
            fail(ErrorKind::AllRowsDropped, frame.experiment_id + ": every row has a defect");
        return out;
    }

    // Interpolate: rows outside [first, last] where every column has a valid
    // neighbour on both sides are dropped, interior gaps are filled linearly.
    std::size_t first = 0;
    std::size_t last = n; // exclusive
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        std::size_t lo = 0;
        while (lo < n && is_defect(in, lo, c))
            ++lo;
        if (lo == n)
            fail(ErrorKind::AllRowsDropped,
                 frame.experiment_id + ": column '" +
                     std::string(ColumnSchema::canonical().name(c)) + "' has no valid cell");
        std::size_t hi = n;
        while (hi > 0 && is_defect(in, hi - 1, c))
            --hi;
        first = std::max(first, lo);
        last = std::min(last, hi);
    }
    if (first >= last)
        fail(ErrorKind::AllRowsDropped, frame.experiment_id + ": no row range survives cleaning");

    out.values = Matrix(last - first, kColumnCount);
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        std::size_t prev = first;
        while (is_defect(in, prev, c))
            --prev;
        for (std::size_t r = first; r < last; ++r) {
            if (!is_defect(in, r, c)) {
                out.values(r - first, c) = in(r, c);
                prev = r;
                continue;
            }
            std::size_t next = r + 1;
            while (is_defect(in, next, c))
                ++next;
            const double a = in(prev, c);
            const double b = in(next, c);
            const double w = static_cast<double>(r - prev) / static_cast<double>(next - prev);
            out.values(r - first, c) = a + (b - a) * w;
        }
    }
    return out;
}

Corpus load_corpus(const std::filesystem::path& directory, double sample_interval_s)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec))
        fail(ErrorKind::IoError, "not a directory: " + directory.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.stem().string() < b.stem().string(); });
    Corpus corpus;
    corpus.reserve(files.size());
    for (const auto& file : files)
        corpus.push_back(load_experiment(file, sample_interval_s));
    return corpus;
}

} // namespace rul
