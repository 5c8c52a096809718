#include "bernstein/errors.hpp"

namespace bernstein {

std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::TailNotConverged: return "TailNotConverged";
        case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
        case ErrorCode::InverseNotBracketed: return "InverseNotBracketed";
        case ErrorCode::MaximizerAtBoundary: return "MaximizerAtBoundary";
        case ErrorCode::AllCoefficientsZero: return "AllCoefficientsZero";
        case ErrorCode::DuplicateFrequency: return "DuplicateFrequency";
        case ErrorCode::GrowthOverflow: return "GrowthOverflow";
        case ErrorCode::DegenerateDifference: return "DegenerateDifference";
        case ErrorCode::NotInfiniteOrder: return "NotInfiniteOrder";
        case ErrorCode::OrdersNotSorted: return "OrdersNotSorted";
        case ErrorCode::NullspaceEmpty: return "NullspaceEmpty";
        case ErrorCode::RestrictedIdenticallyZero: return "RestrictedIdenticallyZero";
        case ErrorCode::VerificationFailed: return "VerificationFailed";
        case ErrorCode::QuadratureNotStabilized: return "QuadratureNotStabilized";
        case ErrorCode::GramSingular: return "GramSingular";
        case ErrorCode::ContourNearZero: return "ContourNearZero";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::NonpositiveQuotient: return "NonpositiveQuotient";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    }
    return "Unknown";
}

}  // namespace bernstein
