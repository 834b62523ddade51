#include "folio/errors.hpp"

namespace folio {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::UnparsableRow: return "UnparsableRow";
        case ErrorCode::OhlcOrderingViolation: return "OhlcOrderingViolation";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::NoCommonStart: return "NoCommonStart";
        case ErrorCode::RangesOverlap: return "RangesOverlap";
        case ErrorCode::InsufficientTrainLength: return "InsufficientTrainLength";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::NonPositiveScale: return "NonPositiveScale";
        case ErrorCode::TickerMismatch: return "TickerMismatch";
        case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::FrameTooShort: return "FrameTooShort";
        case ErrorCode::InvalidAction: return "InvalidAction";
        case ErrorCode::SteppedAfterTerminal: return "SteppedAfterTerminal";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonScalarLoss: return "NonScalarLoss";
        case ErrorCode::WindowTooSmall: return "WindowTooSmall";
        case ErrorCode::BatchTooLarge: return "BatchTooLarge";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::AllRunsFailed: return "AllRunsFailed";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace folio
