#pragma once

#include <stdexcept>
#include <string>

namespace msoc {

enum class ErrorCode {
    NonIntegralRange,
    OutOfRange,
    OutOfHorizon,
    BudgetExceeded,
    Infeasible,
    ConfigInvalid,
    InvalidArgument,
    IoError,
};

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonIntegralRange: return "NonIntegralRange";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::OutOfHorizon: return "OutOfHorizon";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace msoc
