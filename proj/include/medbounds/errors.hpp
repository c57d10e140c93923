#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medbounds {

enum class ErrorCode {
    InvalidArgument,
    EmptyStratum,
    UndefinedConditional,
    MismatchedSupport,
    MonotonicityViolated,
    NotBinaryR,
    Infeasible,
    Internal,
    TooLarge,
    IncoherentBounds,
    EstimatorFailed,
    Config,
    MissingColumn,
    Parse,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so the
/// CLI can map it to an exit status and an error record.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace medbounds
