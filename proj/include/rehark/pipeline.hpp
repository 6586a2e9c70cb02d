#pragma once

// End-to-end adaptation: preprocessing, hybrid prior, bridging, proximal KRR
// fit, and query rectification + inference.

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bridge.hpp"
#include "core.hpp"
#include "io_bundle.hpp"
#include "kernel.hpp"
#include "krr.hpp"
#include "prior.hpp"
#include "transform.hpp"

namespace rehark {

/// The tunable parameters, in the fixed order the sampler draws them.
enum class Param { P, Gamma, Omega, Eta, AlphaR, Lambda, Beta1, Beta2, Pi, SigmaZs, AugmentEnabled };

inline constexpr std::array<Param, 11> kAllParams{Param::P,      Param::Gamma,  Param::Omega, Param::Eta,
                                                  Param::AlphaR, Param::Lambda, Param::Beta1, Param::Beta2,
                                                  Param::Pi,     Param::SigmaZs, Param::AugmentEnabled};

inline std::string_view to_string(Param p) {
    switch (p) {
        case Param::P: return "p";
        case Param::Gamma: return "gamma";
        case Param::Omega: return "omega";
        case Param::Eta: return "eta";
        case Param::AlphaR: return "alpha_r";
        case Param::Lambda: return "lambda";
        case Param::Beta1: return "beta1";
        case Param::Beta2: return "beta2";
        case Param::Pi: return "pi";
        case Param::SigmaZs: return "sigma_zs";
        case Param::AugmentEnabled: return "augment_enabled";
    }
    return "unknown";
}

struct HyperParams {
    double p = 1.0;
    double gamma = 0.5;
    double omega = 0.5;
    double eta = 1.0;
    double alpha_r = 0.0;
    double lambda = 1.0;
    double beta1 = 1.0;
    double beta2 = 1.0;
    double pi = 0.5;
    double sigma_zs = 1.0;
    bool augment_enabled = true;

    double get(Param which) const {
        switch (which) {
            case Param::P: return p;
            case Param::Gamma: return gamma;
            case Param::Omega: return omega;
            case Param::Eta: return eta;
            case Param::AlphaR: return alpha_r;
            case Param::Lambda: return lambda;
            case Param::Beta1: return beta1;
            case Param::Beta2: return beta2;
            case Param::Pi: return pi;
            case Param::SigmaZs: return sigma_zs;
            case Param::AugmentEnabled: return augment_enabled ? 1.0 : 0.0;
        }
        return 0.0;
    }

    void set(Param which, double v) {
        switch (which) {
            case Param::P: p = v; break;
            case Param::Gamma: gamma = v; break;
            case Param::Omega: omega = v; break;
            case Param::Eta: eta = v; break;
            case Param::AlphaR: alpha_r = v; break;
            case Param::Lambda: lambda = v; break;
            case Param::Beta1: beta1 = v; break;
            case Param::Beta2: beta2 = v; break;
            case Param::Pi: pi = v; break;
            case Param::SigmaZs: sigma_zs = v; break;
            case Param::AugmentEnabled: augment_enabled = v != 0.0; break;
        }
    }

    KernelSpec kernel(KernelKind kind) const { return KernelSpec{kind, beta1, beta2, pi}; }

    bool operator==(const HyperParams&) const = default;
};

inline void to_json(nlohmann::json& j, const HyperParams& hp) {
    j = nlohmann::json::object();
    for (auto p : kAllParams) {
        if (p == Param::AugmentEnabled) {
            j[std::string(to_string(p))] = hp.augment_enabled;
        } else {
            j[std::string(to_string(p))] = hp.get(p);
        }
    }
}

/// Missing keys keep their defaults; unknown keys are ignored.
inline void from_json(const nlohmann::json& j, HyperParams& hp) {
    for (auto p : kAllParams) {
        const std::string key(to_string(p));
        if (!j.contains(key)) continue;
        if (p == Param::AugmentEnabled) {
            hp.augment_enabled = j.at(key).get<bool>();
        } else {
            hp.set(p, j.at(key).get<double>());
        }
    }
}

/// The inputs the pipeline needs from a bundle's support side.
struct SupportView {
    const Matrix& features;
    const LabelVector& labels;
    const Matrix& w_clip;
    const Matrix& w_gpt3;
    std::size_t n_classes;

    static SupportView of(const io::Bundle& b) {
        return {b.support_features, b.support_labels, b.w_clip, b.w_gpt3, b.n_classes};
    }
};

struct FittedPipeline {
    HyperParams params;
    Matrix w_text;
    Matrix p_vis;
    AdaptationModel model;
    double eps = 1e-12;

    /// Maps raw query embeddings to the model's space: power transform, then
    /// normalization and rectification against the augmented support.
    Matrix prepare_queries(const Matrix& raw) const {
        return rectify(power_transform(raw, params.p), model.s_aug.features, params.alpha_r, eps);
    }

    Matrix logits(const Matrix& raw_queries) const { return predict(model, prepare_queries(raw_queries)); }

    LabelVector classify(const Matrix& raw_queries) const { return argmax_rows(logits(raw_queries)); }
};

inline FittedPipeline fit_pipeline(const SupportView& s, const HyperParams& hp, KernelKind kind,
                                   double eps = 1e-12) {
    const Matrix support = preprocess(s.features, hp.p, eps);
    const Matrix w_clip = preprocess(s.w_clip, hp.p, eps);
    const Matrix w_gpt3 = preprocess(s.w_gpt3, hp.p, eps);

    FittedPipeline out;
    out.params = hp;
    out.eps = eps;
    out.w_text = blend_text_priors(w_clip, w_gpt3, hp.gamma);
    out.p_vis = visual_prototypes(support, s.labels, s.n_classes);
    Matrix w_prior = refine_prior(out.w_text, out.p_vis, hp.omega);

    const Matrix bridges = hp.augment_enabled ? make_bridges(support, s.labels, w_prior, hp.eta) : Matrix{};
    AugmentedSupport s_aug = augment(support, s.labels, bridges, hp.augment_enabled, s.n_classes);
    out.model = fit(std::move(s_aug), std::move(w_prior), hp.kernel(kind), hp.lambda, hp.sigma_zs);
    return out;
}

inline FittedPipeline fit_pipeline(const io::Bundle& b, const HyperParams& hp, KernelKind kind) {
    return fit_pipeline(SupportView::of(b), hp, kind);
}

}  // namespace rehark
