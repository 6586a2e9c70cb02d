#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rehark {

// Rows are samples (or classes), columns are embedding dimensions.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using LabelVector = std::vector<std::uint32_t>;

enum class ErrorCode {
    BadMagic,
    TruncatedFile,
    UnsupportedVersion,
    IoFailure,
    NonFiniteEntry,
    DimensionMismatch,
    LabelOutOfRange,
    MissingComponent,
    UnbalancedSupport,
    InvalidExponent,
    EmptyInput,
    GammaOutOfRange,
    OmegaOutOfRange,
    EmptyClass,
    InvalidSpec,
    SolveFailure,
    InvalidBudget,
    ConstraintConflict,
    LengthMismatch,
    InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::MissingComponent: return "MissingComponent";
        case ErrorCode::UnbalancedSupport: return "UnbalancedSupport";
        case ErrorCode::InvalidExponent: return "InvalidExponent";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
        case ErrorCode::OmegaOutOfRange: return "OmegaOutOfRange";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::SolveFailure: return "SolveFailure";
        case ErrorCode::InvalidBudget: return "InvalidBudget";
        case ErrorCode::ConstraintConflict: return "ConstraintConflict";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

inline void require_same_cols(const Matrix& a, const Matrix& b, const char* where) {
    if (a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(where) + ": column counts " + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.cols()));
    }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(where) + ": shapes " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
    }
}

inline void require_finite(const Matrix& m, const char* where) {
    if (!m.allFinite()) throw Error(ErrorCode::NonFiniteEntry, where);
}

}  // namespace detail
}  // namespace rehark
