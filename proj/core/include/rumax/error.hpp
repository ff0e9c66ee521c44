#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rumax {

enum class ErrorCode {
    kCyclicTree,
    kMultipleRoots,
    kNonPositivePrice,
    kTimeGap,
    kUnknownLeaf,
    kMissingHolding,
    kLatticeMismatch,
    kInvalidMetricParams,
    kInvalidSpec,
    kNegativeSlope,
    kInfeasibleAmbiguity,
    kNonPositiveInput,
    kHorizonMismatch,
    kLpFailure,
    kInvalidEpsilon,
    kNotConverged,
    kUnboundedBelow,
    kNotExponential,
    kSchemaError,
    kValidationError,
    kInvalidShape,
    kNoConvergence,
    kInvalidMeasure,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rumax
