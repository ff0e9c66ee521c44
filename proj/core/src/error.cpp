#include "rumax/error.hpp"

namespace rumax {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kCyclicTree: return "CyclicTree";
        case ErrorCode::kMultipleRoots: return "MultipleRoots";
        case ErrorCode::kNonPositivePrice: return "NonPositivePrice";
        case ErrorCode::kTimeGap: return "TimeGap";
        case ErrorCode::kUnknownLeaf: return "UnknownLeaf";
        case ErrorCode::kMissingHolding: return "MissingHolding";
        case ErrorCode::kLatticeMismatch: return "LatticeMismatch";
        case ErrorCode::kInvalidMetricParams: return "InvalidMetricParams";
        case ErrorCode::kInvalidSpec: return "InvalidSpec";
        case ErrorCode::kNegativeSlope: return "NegativeSlope";
        case ErrorCode::kInfeasibleAmbiguity: return "InfeasibleAmbiguity";
        case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
        case ErrorCode::kHorizonMismatch: return "HorizonMismatch";
        case ErrorCode::kLpFailure: return "LPFailure";
        case ErrorCode::kInvalidEpsilon: return "InvalidEpsilon";
        case ErrorCode::kNotConverged: return "NotConverged";
        case ErrorCode::kUnboundedBelow: return "UnboundedBelow";
        case ErrorCode::kNotExponential: return "NotExponential";
        case ErrorCode::kSchemaError: return "SchemaError";
        case ErrorCode::kValidationError: return "ValidationError";
        case ErrorCode::kInvalidShape: return "InvalidShape";
        case ErrorCode::kNoConvergence: return "NoConvergence";
        case ErrorCode::kInvalidMeasure: return "InvalidMeasure";
    }
    return "Unknown";
}

}  // namespace rumax
