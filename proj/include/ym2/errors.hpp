#pragma once

#include <stdexcept>
#include <string>

namespace ym2 {

enum class ErrorKind {
    TagMismatch,
    CutLocus,
    NonPositiveTime,
    TruncationInsufficient,
    TableUnderResolved,
    DivergentSphereSum,
    ResolutionTooHigh,
    QuadratureFailure,
    IndexOutOfRange,
    LevelBelowSaddles,
    UnknownGenerator,
    SupportViolation,
    ESSCollapse,
    CutLocusFractionExceeded,
    ParameterOutOfRange,
    EmptyWindow,
    DegenerateInterval,
    InvalidArgument,
    Config
};

inline const char* to_string(ErrorKind k)
{
    switch (k) {
    case ErrorKind::TagMismatch: return "TagMismatch";
    case ErrorKind::CutLocus: return "CutLocus";
    case ErrorKind::NonPositiveTime: return "NonPositiveTime";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::TableUnderResolved: return "TableUnderResolved";
    case ErrorKind::DivergentSphereSum: return "DivergentSphereSum";
    case ErrorKind::ResolutionTooHigh: return "ResolutionTooHigh";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LevelBelowSaddles: return "LevelBelowSaddles";
    case ErrorKind::UnknownGenerator: return "UnknownGenerator";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::ESSCollapse: return "ESSCollapse";
    case ErrorKind::CutLocusFractionExceeded: return "CutLocusFractionExceeded";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::DegenerateInterval: return "DegenerateInterval";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw Error(k, what); }

} // namespace ym2
