#ifndef HOLOATLAS_ERROR_HPP
#define HOLOATLAS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace holoatlas {

enum class ErrorKind {
    NonVanishing,
    Resolution,
    EvaluationOutsideDomain,
    PathThroughZero,
    StepTooCoarse,
    DimensionMismatch,
    NotInOverlap,
    NoTransitionRegistered,
    InvalidParams,
    OutsideAnnulus,
    OutsideDomain,
    NotInV1,
    BranchAmbiguity,
    TruncationInsufficient,
    OnPolarSet,
    IndeterminateAtPoint,
    RankUnstable,
    RangeTooNarrow,
    SumMismatch,
    Mismatch,
    LengthMismatch,
    InvalidProblem,
    ParseError,
    InvalidConfig,
    SweepOutsideDomain,
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
    switch (k) {
    case ErrorKind::NonVanishing: return "NonVanishing";
    case ErrorKind::Resolution: return "Resolution";
    case ErrorKind::EvaluationOutsideDomain: return "EvaluationOutsideDomain";
    case ErrorKind::PathThroughZero: return "PathThroughZero";
    case ErrorKind::StepTooCoarse: return "StepTooCoarse";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotInOverlap: return "NotInOverlap";
    case ErrorKind::NoTransitionRegistered: return "NoTransitionRegistered";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::OutsideAnnulus: return "OutsideAnnulus";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::NotInV1: return "NotInV1";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::OnPolarSet: return "OnPolarSet";
    case ErrorKind::IndeterminateAtPoint: return "IndeterminateAtPoint";
    case ErrorKind::RankUnstable: return "RankUnstable";
    case ErrorKind::RangeTooNarrow: return "RangeTooNarrow";
    case ErrorKind::SumMismatch: return "SumMismatch";
    case ErrorKind::Mismatch: return "Mismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SweepOutsideDomain: return "SweepOutsideDomain";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace holoatlas

#endif // HOLOATLAS_ERROR_HPP
