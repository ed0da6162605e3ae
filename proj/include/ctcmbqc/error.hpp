#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ctcmbqc {

enum class ErrorCode {
    Parse,
    Validation,
    KindMismatch,
    NonPhysical,
    DimensionMismatch,
    NonUnitary,
    RequiresConsistencySemantics,
    UnsupportedBellOutcome,
    UnsupportedGate,
    UnknownSignal,
    UnverifiedStabilizer,
    BudgetExceeded,
    InputVertex,
    NotStandardizable,
    VerificationFailed,
    Io,
};

const char *error_code_name(ErrorCode code);

/// Exception carrying a machine-readable code. Parse errors carry a line and
/// column; semantic circuit errors carry the offending timeline event.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message);
    Error(ErrorCode code, const std::string &message, std::size_t event);
    Error(ErrorCode code, const std::string &message, std::size_t line, std::size_t column);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> event() const noexcept { return event_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

   private:
    ErrorCode code_;
    std::optional<std::size_t> event_;
    std::optional<std::size_t> line_;
    std::optional<std::size_t> column_;
};

}  // namespace ctcmbqc
