#include "medbounds/errors.hpp"

namespace medbounds {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyStratum: return "EmptyStratum";
        case ErrorCode::UndefinedConditional: return "UndefinedConditional";
        case ErrorCode::MismatchedSupport: return "MismatchedSupport";
        case ErrorCode::MonotonicityViolated: return "MonotonicityViolated";
        case ErrorCode::NotBinaryR: return "NotBinaryR";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::Internal: return "Internal";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::IncoherentBounds: return "IncoherentBounds";
        case ErrorCode::EstimatorFailed: return "EstimatorFailed";
        case ErrorCode::Config: return "Config";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace medbounds
