#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace framelab {

enum class ErrorCode {
    InvalidArgument,
    NotSymmetric,
    NotAFrame,
    NotParseval,
    NotRieszBasis,
    NotABasis,
    DimensionMismatch,
    TooFewVectors,
    ComplexNotSupported,
    NormsDiffer,
    UnrealizableNorms,
    SingularOperator,
    VectorsOutsideSubspace,
    CandidateBudgetExhausted,
    ConstructionBudgetExhausted,
    PremiseFailed,
    PreconditionRange,
    ScanTooLarge,
    ParseError,
    ZeroVector,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NotAFrame: return "NotAFrame";
        case ErrorCode::NotParseval: return "NotParseval";
        case ErrorCode::NotRieszBasis: return "NotRieszBasis";
        case ErrorCode::NotABasis: return "NotABasis";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewVectors: return "TooFewVectors";
        case ErrorCode::ComplexNotSupported: return "ComplexNotSupported";
        case ErrorCode::NormsDiffer: return "NormsDiffer";
        case ErrorCode::UnrealizableNorms: return "UnrealizableNorms";
        case ErrorCode::SingularOperator: return "SingularOperator";
        case ErrorCode::VectorsOutsideSubspace: return "VectorsOutsideSubspace";
        case ErrorCode::CandidateBudgetExhausted: return "CandidateBudgetExhausted";
        case ErrorCode::ConstructionBudgetExhausted: return "ConstructionBudgetExhausted";
        case ErrorCode::PremiseFailed: return "PremiseFailed";
        case ErrorCode::PreconditionRange: return "PreconditionRange";
        case ErrorCode::ScanTooLarge: return "ScanTooLarge";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ZeroVector: return "ZeroVector";
    }
    return "Unknown";
}

class FrameError : public std::runtime_error {
public:
    FrameError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace framelab
