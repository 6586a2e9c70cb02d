#pragma once

// Reference classifiers used as comparison rows.

#include "core.hpp"
#include "krr.hpp"

namespace rehark {

/// Cache-model parameters: affinity sharpness and cache weight.
struct NwParams {
    double beta_nw = 1.0;
    double mix = 1.0;
};

inline LabelVector zero_shot_classify(const Matrix& x, const Matrix& w_text, double sigma_zs) {
    return argmax_rows(zero_shot_logits(x, w_text, sigma_zs));
}

/// Nadaraya-Watson style cache logits:
/// sigma_zs * x W^T + mix * exp(-beta_nw * (1 - x S^T)) Y
inline Matrix nw_logits(const Matrix& queries, const Matrix& support, const Matrix& labels_onehot,
                        const Matrix& w_text, const NwParams& params, double sigma_zs) {
    detail::require_same_cols(queries, support, "nw_classify");
    detail::require(labels_onehot.rows() == support.rows() && labels_onehot.cols() == w_text.rows(),
                    ErrorCode::DimensionMismatch, "nw_classify: label matrix shape");
    detail::require(params.beta_nw > 0.0, ErrorCode::InvalidArgument, "beta_nw must be > 0");
    detail::require(params.mix >= 0.0, ErrorCode::InvalidArgument, "mix must be >= 0");
    Matrix logits = zero_shot_logits(queries, w_text, sigma_zs);
    if (params.mix == 0.0) return logits;
    const Matrix affinity =
        (-params.beta_nw * (1.0 - (queries * support.transpose()).array())).exp().matrix();
    logits += params.mix * (affinity * labels_onehot);
    return logits;
}

inline LabelVector nw_classify(const Matrix& queries, const Matrix& support, const Matrix& labels_onehot,
                               const Matrix& w_text, const NwParams& params, double sigma_zs) {
    return argmax_rows(nw_logits(queries, support, labels_onehot, w_text, params, sigma_zs));
}

}  // namespace rehark
