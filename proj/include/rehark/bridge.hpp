#pragma once

#include <vector>

#include "core.hpp"
#include "transform.hpp"

namespace rehark {

enum class SampleSource : std::uint8_t { Visual, Bridge };

struct AugmentedSupport {
    Matrix features;
    Matrix labels_onehot;  // rows x n_classes
    LabelVector labels;
    std::vector<SampleSource> source;

    Eigen::Index size() const { return features.rows(); }
};

/// Bridge row i = normalize(support_i + eta * w_prior[label_i]).
inline Matrix make_bridges(const Matrix& support, const LabelVector& labels, const Matrix& w_prior, double eta) {
    detail::require_same_cols(support, w_prior, "make_bridges");
    detail::require(static_cast<std::size_t>(support.rows()) == labels.size(), ErrorCode::DimensionMismatch,
                    "make_bridges: labels do not match support rows");
    detail::require(eta >= 0.0, ErrorCode::InvalidArgument, "eta must be >= 0");
    Matrix out = support;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
        const auto l = labels[static_cast<std::size_t>(i)];
        detail::require(l < w_prior.rows(), ErrorCode::LabelOutOfRange, std::to_string(l));
        out.row(i) += eta * w_prior.row(l);
    }
    return l2_normalize(out);
}

/// Stacks [support; bridges] with duplicated one-hot labels, or passes the
/// support through alone when augmentation is disabled.
inline AugmentedSupport augment(const Matrix& support, const LabelVector& labels, const Matrix& bridges, bool enabled,
                                std::size_t n_classes) {
    detail::require(static_cast<std::size_t>(support.rows()) == labels.size(), ErrorCode::DimensionMismatch,
                    "augment: labels do not match support rows");
    if (enabled) detail::require_same_shape(support, bridges, "augment");

    const Eigen::Index n = support.rows();
    const Eigen::Index total = enabled ? 2 * n : n;
    AugmentedSupport aug;
    aug.features.resize(total, support.cols());
    aug.features.topRows(n) = support;
    if (enabled) aug.features.bottomRows(n) = bridges;
    aug.labels_onehot = Matrix::Zero(total, static_cast<Eigen::Index>(n_classes));
    aug.labels.reserve(static_cast<std::size_t>(total));
    aug.source.reserve(static_cast<std::size_t>(total));
    for (Eigen::Index r = 0; r < total; ++r) {
        const auto l = labels[static_cast<std::size_t>(r % n)];
        detail::require(l < n_classes, ErrorCode::LabelOutOfRange, std::to_string(l));
        aug.labels_onehot(r, l) = 1.0;
        aug.labels.push_back(l);
        aug.source.push_back(r < n ? SampleSource::Visual : SampleSource::Bridge);
    }
    return aug;
}

}  // namespace rehark
