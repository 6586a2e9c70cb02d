#pragma once

// Gaussian-mixture-on-sphere bundles for tests and demos.
//
// Each class has a random unit mean. Support, validation and test samples are
// normalized noisy copies of their class mean; validation and test queries
// additionally carry a shared offset (a domain shift the support does not
// have). Text weights are noisy copies of the class means, with separate
// noise levels for the CLIP and GPT-3 rows.

#include <random>
#include <string>

#include "core.hpp"
#include "io_bundle.hpp"
#include "transform.hpp"

namespace rehark {

struct SyntheticConfig {
    std::string name = "synthetic";
    std::size_t n_classes = 3;
    std::size_t dim = 8;
    std::size_t shots = 1;
    std::size_t val_per_class = 10;
    std::size_t test_per_class = 20;
    double sample_noise = 0.5;  // visual noise, relative to a unit class mean
    double clip_noise = 0.5;
    double gpt3_noise = 0.5;
    double query_shift = 0.0;  // norm of the shared query offset
    std::uint64_t seed = 0;
};

inline io::Bundle make_synthetic_bundle(const SyntheticConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    const auto n = static_cast<Eigen::Index>(cfg.n_classes);
    // Isotropic noise with unit expected norm.
    auto gaussian = [&](double scale) {
        RowVector v(d);
        for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng) * scale / std::sqrt(static_cast<double>(d));
        return v;
    };
    auto unit = [&] {
        RowVector v = gaussian(1.0);
        return RowVector(v / v.norm());
    };

    Matrix means(n, d);
    for (Eigen::Index c = 0; c < n; ++c) means.row(c) = unit();
    const RowVector shift = unit() * cfg.query_shift;

    auto draw = [&](std::size_t per_class, bool shifted, Matrix& x, LabelVector& y) {
        x.resize(static_cast<Eigen::Index>(per_class) * n, d);
        y.clear();
        Eigen::Index r = 0;
        for (std::size_t k = 0; k < per_class; ++k) {
            for (Eigen::Index c = 0; c < n; ++c, ++r) {
                x.row(r) = means.row(c) + gaussian(cfg.sample_noise);
                if (shifted) x.row(r) += shift;
                y.push_back(static_cast<std::uint32_t>(c));
            }
        }
        x = l2_normalize(x);
    };

    io::Bundle b;
    b.name = cfg.name;
    b.n_classes = cfg.n_classes;
    b.n_shots = cfg.shots;
    b.dim = cfg.dim;
    draw(cfg.shots, false, b.support_features, b.support_labels);
    draw(cfg.val_per_class, true, b.val_features, b.val_labels);
    draw(cfg.test_per_class, true, b.test_features, b.test_labels);
    b.w_clip.resize(n, d);
    b.w_gpt3.resize(n, d);
    for (Eigen::Index c = 0; c < n; ++c) {
        b.w_clip.row(c) = means.row(c) + gaussian(cfg.clip_noise);
        b.w_gpt3.row(c) = means.row(c) + gaussian(cfg.gpt3_noise);
        b.class_names.push_back("class_" + std::to_string(c));
    }
    b.w_clip = l2_normalize(b.w_clip);
    b.w_gpt3 = l2_normalize(b.w_gpt3);

    // Round through f32 so an in-memory fixture equals its saved-and-loaded copy.
    for (Matrix* m : {&b.support_features, &b.val_features, &b.test_features, &b.w_clip, &b.w_gpt3}) {
        *m = m->cast<float>().cast<double>();
    }
    io::validate_bundle(b);
    return b;
}

}  // namespace rehark
