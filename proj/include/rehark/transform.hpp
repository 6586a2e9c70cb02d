#pragma once

#include <cmath>
#include <vector>

#include "core.hpp"

namespace rehark {

struct TransformParams {
    double p = 1.0;
    double alpha_r = 0.0;
    double eps = 1e-12;
};

/// Elementwise sign(x) * |x|^p.
inline Matrix power_transform(const Matrix& x, double p) {
    detail::require(p > 0.0 && std::isfinite(p), ErrorCode::InvalidExponent, "p must be > 0, got " + std::to_string(p));
    detail::require_finite(x, "power_transform input");
    if (p == 1.0) return x;
    return x.unaryExpr([p](double v) {
        if (v == 0.0) return v;
        return std::copysign(std::pow(std::abs(v), p), v);
    });
}

struct NormalizedRows {
    Matrix values;
    // Rows whose norm fell below eps; they are passed through unchanged.
    std::vector<Eigen::Index> degenerate_rows;
};

inline NormalizedRows l2_normalize_flagged(const Matrix& x, double eps) {
    detail::require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be > 0");
    NormalizedRows out{x, {}};
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double n = x.row(r).norm();
        if (n < eps) {
            out.degenerate_rows.push_back(r);
        } else {
            out.values.row(r) /= n;
        }
    }
    return out;
}

inline Matrix l2_normalize(const Matrix& x, double eps = 1e-12) {
    return l2_normalize_flagged(x, eps).values;
}

/// First-moment alignment of queries with the augmented support set.
/// Query rows are normalized, shifted by alpha_r * (mean(support) - mean(queries))
/// and renormalized. alpha_r == 0 stops after the first normalization.
inline Matrix rectify(const Matrix& query, const Matrix& support_aug, double alpha_r, double eps = 1e-12) {
    detail::require_same_cols(query, support_aug, "rectify");
    detail::require(query.rows() >= 1 && support_aug.rows() >= 1, ErrorCode::EmptyInput, "rectify needs rows");
    detail::require(alpha_r >= 0.0, ErrorCode::InvalidArgument, "alpha_r must be >= 0");
    Matrix q = l2_normalize(query, eps);
    if (alpha_r == 0.0) return q;
    const RowVector shift = alpha_r * (support_aug.colwise().mean() - q.colwise().mean());
    q.rowwise() += shift;
    return l2_normalize(q, eps);
}

/// The fixed preprocessing applied to every feature set: power transform then normalization.
inline Matrix preprocess(const Matrix& x, double p, double eps = 1e-12) {
    return l2_normalize(power_transform(x, p), eps);
}

}  // namespace rehark
