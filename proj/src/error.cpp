#include "ctcmbqc/error.hpp"

namespace ctcmbqc {

const char *error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Validation: return "Validation";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::NonPhysical: return "NonPhysical";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonUnitary: return "NonUnitary";
        case ErrorCode::RequiresConsistencySemantics: return "RequiresConsistencySemantics";
        case ErrorCode::UnsupportedBellOutcome: return "UnsupportedBellOutcome";
        case ErrorCode::UnsupportedGate: return "UnsupportedGate";
        case ErrorCode::UnknownSignal: return "UnknownSignal";
        case ErrorCode::UnverifiedStabilizer: return "UnverifiedStabilizer";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::InputVertex: return "InputVertex";
        case ErrorCode::NotStandardizable: return "NotStandardizable";
        case ErrorCode::VerificationFailed: return "VerificationFailed";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

Error::Error(ErrorCode code, const std::string &message, std::size_t event)
    : std::runtime_error(std::string(error_code_name(code)) + "{event " + std::to_string(event) + "}: " + message),
      code_(code),
      event_(event) {}

Error::Error(ErrorCode code, const std::string &message, std::size_t line, std::size_t column)
    : std::runtime_error(
          std::string(error_code_name(code)) + " at line " + std::to_string(line) + ", column " +
          std::to_string(column) + ": " + message),
      code_(code),
      line_(line),
      column_(column) {}

}  // namespace ctcmbqc
