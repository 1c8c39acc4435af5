#include "catp/error.hpp"

namespace catp {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorCode::WeightLengthMismatch: return "WeightLengthMismatch";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::ZeroMassWeights: return "ZeroMassWeights";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::BadReport: return "BadReport";
    }
    return "UnknownError";
}

} // namespace catp
