#pragma once

// Proximal kernel ridge regression anchored to a zero-shot predictor.
//
// fit:      alpha = (K + lambda I)^-1 (Y - sigma_zs * S W^T)
// predict:  logits(x) = sigma_zs * x W^T + K(x, S) alpha
//
// Y is the one-hot label matrix of the augmented support S. As lambda grows
// alpha shrinks to zero and predictions collapse onto the scaled zero-shot
// logits.

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "bridge.hpp"
#include "core.hpp"
#include "io_bundle.hpp"
#include "kernel.hpp"

namespace rehark {

struct AdaptationModel {
    AugmentedSupport s_aug;
    Matrix w_prior;
    KernelSpec spec;
    double lambda = 1.0;
    double sigma_zs = 1.0;
    Matrix alpha_coef;  // |S_aug| x N

    std::size_t n_classes() const { return static_cast<std::size_t>(w_prior.rows()); }
};

inline Matrix zero_shot_logits(const Matrix& x, const Matrix& w_prior, double sigma_zs) {
    detail::require_same_cols(x, w_prior, "zero_shot_logits");
    return sigma_zs * (x * w_prior.transpose());
}

inline AdaptationModel fit(AugmentedSupport s_aug, Matrix w_prior, const KernelSpec& spec, double lambda,
                           double sigma_zs) {
    detail::require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument, "lambda must be > 0");
    detail::require(s_aug.size() > 0, ErrorCode::EmptyInput, "fit: empty support");
    detail::require(s_aug.labels_onehot.rows() == s_aug.size() && s_aug.labels_onehot.cols() == w_prior.rows(),
                    ErrorCode::DimensionMismatch, "fit: label matrix does not match support/prior");
    detail::require_same_cols(s_aug.features, w_prior, "fit");

    Matrix system = gram(s_aug.features, spec);
    system.diagonal().array() += lambda;
    const Matrix residual = s_aug.labels_onehot - zero_shot_logits(s_aug.features, w_prior, sigma_zs);
    if (!system.allFinite() || !residual.allFinite()) throw Error(ErrorCode::SolveFailure, "non-finite system");

    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "Cholesky factorization failed");
    Matrix alpha = llt.solve(residual);
    if (!alpha.allFinite()) throw Error(ErrorCode::SolveFailure, "non-finite coefficients");

    return AdaptationModel{std::move(s_aug), std::move(w_prior), spec, lambda, sigma_zs, std::move(alpha)};
}

inline Matrix predict(const AdaptationModel& model, const Matrix& queries) {
    detail::require_same_cols(queries, model.s_aug.features, "predict");
    return zero_shot_logits(queries, model.w_prior, model.sigma_zs) +
           gram(queries, model.s_aug.features, model.spec) * model.alpha_coef;
}

/// Row-wise argmax; ties go to the lowest class index.
inline LabelVector argmax_rows(const Matrix& logits) {
    LabelVector out(static_cast<std::size_t>(logits.rows()), 0);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c) {
            if (logits(r, c) > logits(r, best)) best = c;
        }
        out[static_cast<std::size_t>(r)] = static_cast<std::uint32_t>(best);
    }
    return out;
}

inline LabelVector predict_labels(const AdaptationModel& model, const Matrix& queries) {
    return argmax_rows(predict(model, queries));
}

// Model persistence: matrices go to MatrixFile/LabelFile, scalars to a JSON
// sidecar. Matrices are stored as f32, so a saved model reloads as its f32
// rounding and re-saving that reload reproduces the files byte for byte.

inline void save_model(const AdaptationModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::save_matrix(model.alpha_coef, dir / "alpha.rehk");
    io::save_matrix(model.s_aug.features, dir / "support_aug.rehk");
    io::save_labels(model.s_aug.labels, dir / "support_aug_labels.rehl");
    io::save_matrix(model.w_prior, dir / "w_prior.rehk");
    std::vector<int> bridge_mask;
    for (auto s : model.s_aug.source) bridge_mask.push_back(s == SampleSource::Bridge ? 1 : 0);
    nlohmann::json meta = {
        {"kernel", std::string(to_string(model.spec.kind))},
        {"beta1", model.spec.beta1},
        {"beta2", model.spec.beta2},
        {"pi", model.spec.pi},
        {"lambda", model.lambda},
        {"sigma_zs", model.sigma_zs},
        {"n_classes", model.n_classes()},
        {"bridge_mask", bridge_mask},
        {"alpha", "alpha.rehk"},
        {"support_aug", "support_aug.rehk"},
        {"support_aug_labels", "support_aug_labels.rehl"},
        {"w_prior", "w_prior.rehk"},
    };
    io::detail::write_file(dir / "model.json", meta.dump(2) + "\n");
}

inline AdaptationModel load_model(const std::filesystem::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(io::detail::read_file(dir / "model.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoFailure, (dir / "model.json").string() + ": " + e.what());
    }
    AdaptationModel m;
    try {
        const auto kind = parse_kernel_kind(meta.at("kernel").get<std::string>());
        detail::require(kind.has_value(), ErrorCode::InvalidSpec, "unknown kernel in model.json");
        m.spec = KernelSpec{*kind, meta.at("beta1").get<double>(), meta.at("beta2").get<double>(),
                            meta.at("pi").get<double>()};
        m.lambda = meta.at("lambda").get<double>();
        m.sigma_zs = meta.at("sigma_zs").get<double>();
        m.alpha_coef = io::load_matrix(dir / meta.at("alpha").get<std::string>());
        m.s_aug.features = io::load_matrix(dir / meta.at("support_aug").get<std::string>());
        m.s_aug.labels = io::load_labels(dir / meta.at("support_aug_labels").get<std::string>());
        m.w_prior = io::load_matrix(dir / meta.at("w_prior").get<std::string>());
        const auto mask = meta.at("bridge_mask").get<std::vector<int>>();
        const auto n = meta.at("n_classes").get<std::size_t>();
        detail::require(mask.size() == m.s_aug.labels.size(), ErrorCode::DimensionMismatch, "bridge_mask length");
        m.s_aug.labels_onehot = Matrix::Zero(static_cast<Eigen::Index>(mask.size()), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < mask.size(); ++i) {
            detail::require(m.s_aug.labels[i] < n, ErrorCode::LabelOutOfRange, "model label");
            m.s_aug.labels_onehot(static_cast<Eigen::Index>(i), m.s_aug.labels[i]) = 1.0;
            m.s_aug.source.push_back(mask[i] ? SampleSource::Bridge : SampleSource::Visual);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MissingComponent, std::string("model.json: ") + e.what());
    }
    detail::require(m.alpha_coef.rows() == m.s_aug.size(), ErrorCode::DimensionMismatch, "alpha rows");
    detail::require(m.alpha_coef.cols() == m.w_prior.rows(), ErrorCode::DimensionMismatch, "alpha cols");
    detail::require_same_cols(m.s_aug.features, m.w_prior, "load_model");
    return m;
}

}  // namespace rehark
