#include "rul/error.hpp"

namespace rul {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::ColumnCountMismatch: return "ColumnCountMismatch";
    case ErrorKind::AllRowsDropped: return "AllRowsDropped";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownExperiment: return "UnknownExperiment";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidConfig:
        return ErrorCategory::Config;
    case ErrorKind::NonFiniteLoss:
        return ErrorCategory::Numerical;
    case ErrorKind::IoError:
        return ErrorCategory::Io;
    default:
        return ErrorCategory::Data;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

Error Error::with_stage(std::string stage) const
{
    Error tagged(kind_, "[" + stage + "] " + std::string(what()).substr(to_string(kind_).size() + 2));
    tagged.stage_ = std::move(stage);
    return tagged;
}

void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace rul
