#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rul {

enum class ErrorKind {
    // configuration
    InvalidConfig,
    // data
    MissingColumn,
    EmptyFile,
    ColumnCountMismatch,
    AllRowsDropped,
    EmptySeries,
    ZeroVarianceColumn,
    TooFewRows,
    KOutOfRange,
    SchemaMismatch,
    InsufficientData,
    DimensionMismatch,
    UnknownExperiment,
    LengthMismatch,
    EmptyInput,
    NonFiniteValue,
    // numerics
    NonFiniteLoss,
    // io
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Coarse category used by the CLI to pick an exit code.
enum class ErrorCategory { Config, Data, Numerical, Io };

ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    /// Pipeline stage the error escaped from; empty unless tagged.
    const std::string& stage() const noexcept { return stage_; }

    /// Copy of this error with a stage prefix attached to the message.
    Error with_stage(std::string stage) const;

private:
    ErrorKind kind_;
    std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace rul
