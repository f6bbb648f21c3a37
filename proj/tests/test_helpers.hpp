#pragma once

#include "rul/telemetry.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace rul::test {

/// Scratch directory removed when the object goes out of scope.
class TempDir {
public:
    TempDir()
    {
        static std::mt19937_64 counter(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("rul_test_" + std::to_string(counter()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string canonical_header()
{
    std::string out;
    for (auto name : ColumnSchema::canonical().names()) {
        if (!out.empty())
            out += ',';
        out += name;
    }
    return out;
}

/// Row with response `response` and predictor j equal to `base + j`.
inline std::string csv_row(double response, double base)
{
    std::string out = format_double(response);
    for (std::size_t j = 1; j < kColumnCount; ++j)
        out += "," + format_double(base + static_cast<double>(j));
    return out;
}

} // namespace rul::test
