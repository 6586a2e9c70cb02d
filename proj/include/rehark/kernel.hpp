#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "core.hpp"

namespace rehark {

enum class KernelKind { Linear, Laplacian, Rbf, MultiScaleRbf };

inline std::string_view to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Laplacian: return "laplacian";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::MultiScaleRbf: return "multiscale_rbf";
    }
    return "unknown";
}

inline std::optional<KernelKind> parse_kernel_kind(std::string_view name) {
    for (auto k : {KernelKind::Linear, KernelKind::Laplacian, KernelKind::Rbf, KernelKind::MultiScaleRbf}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

/// Single-scale kernels (Laplacian, Rbf) use beta1; pi only affects MultiScaleRbf.
struct KernelSpec {
    KernelKind kind = KernelKind::MultiScaleRbf;
    double beta1 = 1.0;
    double beta2 = 1.0;
    double pi = 0.5;

    void validate() const {
        auto positive = [](double b) { return std::isfinite(b) && b > 0.0; };
        switch (kind) {
            case KernelKind::Linear: return;
            case KernelKind::Laplacian:
            case KernelKind::Rbf:
                detail::require(positive(beta1), ErrorCode::InvalidSpec, "beta1 must be > 0");
                return;
            case KernelKind::MultiScaleRbf:
                detail::require(positive(beta1) && positive(beta2), ErrorCode::InvalidSpec, "betas must be > 0");
                detail::require(pi >= 0.0 && pi <= 1.0, ErrorCode::InvalidSpec, "pi must lie in [0,1]");
                return;
        }
    }
};

/// ||x_i - y_j||^2 via the expansion ||x||^2 + ||y||^2 - 2 x.y, negatives clamped to 0.
inline Matrix squared_euclidean_distances(const Matrix& x, const Matrix& y) {
    detail::require_same_cols(x, y, "squared_euclidean_distances");
    const Vector xn = x.rowwise().squaredNorm();
    const Vector yn = y.rowwise().squaredNorm();
    Matrix d = -2.0 * (x * y.transpose());
    d.colwise() += xn;
    d.rowwise() += yn.transpose();
    return d.cwiseMax(0.0);
}

inline Matrix manhattan_distances(const Matrix& x, const Matrix& y) {
    detail::require_same_cols(x, y, "manhattan_distances");
    Matrix d(x.rows(), y.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < y.rows(); ++j) d(i, j) = (x.row(i) - y.row(j)).cwiseAbs().sum();
    }
    return d;
}

namespace detail {

inline Matrix apply_kernel(Matrix dist, const KernelSpec& spec) {
    switch (spec.kind) {
        case KernelKind::Linear: return dist;  // already the inner products
        case KernelKind::Laplacian:
        case KernelKind::Rbf: return (-spec.beta1 * dist.array()).exp().matrix();
        case KernelKind::MultiScaleRbf:
            // Same vectorized exp as Rbf so pi == 1 reproduces it bit for bit.
            return (spec.pi * (-spec.beta1 * dist.array()).exp() +
                    (1.0 - spec.pi) * (-spec.beta2 * dist.array()).exp())
                .matrix();
    }
    return dist;
}

}  // namespace detail

/// Gram matrix K(x_i, y_j) for the given kernel.
inline Matrix gram(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
    detail::require_same_cols(x, y, "gram");
    spec.validate();
    switch (spec.kind) {
        case KernelKind::Linear: return x * y.transpose();
        case KernelKind::Laplacian: return detail::apply_kernel(manhattan_distances(x, y), spec);
        default: return detail::apply_kernel(squared_euclidean_distances(x, y), spec);
    }
}

/// Self-Gram matrix; the diagonal distance is exactly zero so stationary kernels give a unit diagonal.
inline Matrix gram(const Matrix& x, const KernelSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case KernelKind::Linear: return x * x.transpose();
        case KernelKind::Laplacian: return detail::apply_kernel(manhattan_distances(x, x), spec);
        default: {
            Matrix d = squared_euclidean_distances(x, x);
            d.diagonal().setZero();
            // The expansion is not exactly symmetric in floating point.
            d = 0.5 * (d + d.transpose()).eval();
            return detail::apply_kernel(std::move(d), spec);
        }
    }
}

}  // namespace rehark
