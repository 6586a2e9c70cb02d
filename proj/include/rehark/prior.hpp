#pragma once

#include "core.hpp"
#include "transform.hpp"

namespace rehark {

struct PriorParams {
    double gamma = 0.0;  // CLIP vs GPT-3 text mixing
    double omega = 0.0;  // text vs visual prototype balance
};

/// Row-normalized (1 - gamma) * w_clip + gamma * w_gpt3.
inline Matrix blend_text_priors(const Matrix& w_clip, const Matrix& w_gpt3, double gamma) {
    detail::require_same_shape(w_clip, w_gpt3, "blend_text_priors");
    detail::require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::GammaOutOfRange, std::to_string(gamma));
    return l2_normalize((1.0 - gamma) * w_clip + gamma * w_gpt3);
}

/// Normalized class centroids of the support set, one row per class.
inline Matrix visual_prototypes(const Matrix& support, const LabelVector& labels, std::size_t n_classes) {
    detail::require(static_cast<std::size_t>(support.rows()) == labels.size(), ErrorCode::DimensionMismatch,
                    "visual_prototypes: labels do not match support rows");
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(n_classes), support.cols());
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        detail::require(labels[i] < n_classes, ErrorCode::LabelOutOfRange, std::to_string(labels[i]));
        sums.row(labels[i]) += support.row(static_cast<Eigen::Index>(i));
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        detail::require(counts[c] > 0, ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no support");
        sums.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
    }
    return l2_normalize(sums);
}

/// Row-normalized (1 - omega) * w_text + omega * p_vis. With omega == 0 the
/// text prior (already unit rows) is returned as is, without renormalizing.
inline Matrix refine_prior(const Matrix& w_text, const Matrix& p_vis, double omega) {
    detail::require_same_shape(w_text, p_vis, "refine_prior");
    detail::require(omega >= 0.0 && omega <= 1.0, ErrorCode::OmegaOutOfRange, std::to_string(omega));
    if (omega == 0.0) return w_text;
    return l2_normalize((1.0 - omega) * w_text + omega * p_vis);
}

}  // namespace rehark
