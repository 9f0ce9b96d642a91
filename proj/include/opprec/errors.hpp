#pragma once

#include <stdexcept>
#include <string>

namespace opprec {

enum class ErrorCode {
    NonConforming,
    MatchingViolation,
    DegenerateTriangle,
    NotALeaf,
    ClosureDepthExceeded,
    LevelMismatch,
    SizeMismatch,
    MeshTooLarge,
    OpenSurface,
    QuadratureBreakdown,
    SingularOperand,
    NotConverged,
    InnerProductBreakdown,
    IoFailure,
    InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonConforming: return "NonConforming";
    case ErrorCode::MatchingViolation: return "MatchingViolation";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NotALeaf: return "NotALeaf";
    case ErrorCode::ClosureDepthExceeded: return "ClosureDepthExceeded";
    case ErrorCode::LevelMismatch: return "LevelMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MeshTooLarge: return "MeshTooLarge";
    case ErrorCode::OpenSurface: return "OpenSurface";
    case ErrorCode::QuadratureBreakdown: return "QuadratureBreakdown";
    case ErrorCode::SingularOperand: return "SingularOperand";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InnerProductBreakdown: return "InnerProductBreakdown";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace opprec
