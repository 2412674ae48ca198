#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace catfuse {

enum class ErrorCode {
    InvalidArgument,
    InvalidSchema,
    Io,
    MissingColumn,
    UnknownLevel,
    NonNumericResponse,
    EmptyDataset,
    UnknownFactor,
    DegenerateFactor,
    NotOrdinal,
    NonPositiveWeight,
    NonPositiveGamma,
    UnobservedLevel,
    OlsUnavailable,
    MissingCoordinates,
    NotConverged,
    LayoutMismatch,
    RankDeficient,
    FoldRankDeficient,
    ShapeMismatch,
    UnknownScenario,
};

std::string_view to_string(ErrorCode code);

/*
 * Single exception type for the library. The code is machine-readable and is
 * what the CLI reports; the message carries the context (row, factor, fold...).
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message)
        , code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace catfuse
