#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace folio {

enum class ErrorCode {
    // market data
    MissingColumn,
    UnparsableRow,
    OhlcOrderingViolation,
    EmptySeries,
    EmptyIntersection,
    NoCommonStart,
    RangesOverlap,
    InsufficientTrainLength,
    IndexOutOfRange,
    // normalization
    NonPositiveScale,
    TickerMismatch,
    // environment
    WindowOutOfRange,
    NoConvergence,
    BracketFailure,
    FrameTooShort,
    InvalidAction,
    SteppedAfterTerminal,
    // tensors / autodiff
    ShapeMismatch,
    NonScalarLoss,
    // policy
    WindowTooSmall,
    // trainer
    BatchTooLarge,
    NonFiniteLoss,
    // metrics
    EmptyTrajectory,
    ZeroVariance,
    TooShort,
    // experiment / io
    InvalidConfig,
    IoError,
    AllRunsFailed,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace folio
