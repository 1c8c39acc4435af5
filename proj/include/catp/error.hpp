#pragma once

#include <stdexcept>
#include <string>

namespace catp {

enum class ErrorCode {
    BadMagic,
    UnsupportedVersion,
    KindMismatch,
    TruncatedPayload,
    NonFiniteValue,
    NegativeValue,
    InvalidDimensions,
    IoFailure,
    LayerOutOfRange,
    WeightLengthMismatch,
    EmptyColumn,
    ZeroMassWeights,
    RatioOutOfRange,
    KOutOfRange,
    BadReport,
};

const char* to_string(ErrorCode code);

/// All recoverable failures in the library surface as this exception.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace catp
