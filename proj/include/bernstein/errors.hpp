#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bernstein {

/// Failure modes shared by every module of the lab.
enum class ErrorCode {
    TailNotConverged,
    UnsupportedDepth,
    InverseNotBracketed,
    MaximizerAtBoundary,
    AllCoefficientsZero,
    DuplicateFrequency,
    GrowthOverflow,
    DegenerateDifference,
    NotInfiniteOrder,
    OrdersNotSorted,
    NullspaceEmpty,
    RestrictedIdenticallyZero,
    VerificationFailed,
    QuadratureNotStabilized,
    GramSingular,
    ContourNearZero,
    InsufficientPoints,
    NonpositiveQuotient,
    InvalidArgument,
    ConfigInvalid,
    CacheCorrupt,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace bernstein
