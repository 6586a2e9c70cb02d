#pragma once

// Seeded random search over the pipeline's hyperparameters.
//
// A master mt19937_64 seeded with the user seed emits one 64-bit seed per
// trial, in trial order. Each trial draws its parameters from its own engine,
// so trial i is identical for every budget > i and for any thread schedule.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "io_bundle.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"

namespace rehark {

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;

    double sample(std::mt19937_64& rng) const {
        const double u = uniform01(rng);
        if (log_scale) return std::clamp(std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo))), lo, hi);
        return lo + u * (hi - lo);
    }

    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SearchSpace {
    Range p{0.5, 1.0};
    Range gamma{0.0, 1.0};
    Range omega{0.0, 1.0};
    Range eta{0.0, 2.0};
    Range alpha_r{0.0, 1.0};
    Range lambda{1e-3, 1e3, true};
    Range beta1{0.5, 50.0, true};
    Range beta2{0.5, 50.0, true};
    Range pi{0.0, 1.0};
    Range sigma_zs{0.5, 10.0};

    const Range* range(Param which) const {
        switch (which) {
            case Param::P: return &p;
            case Param::Gamma: return &gamma;
            case Param::Omega: return &omega;
            case Param::Eta: return &eta;
            case Param::AlphaR: return &alpha_r;
            case Param::Lambda: return &lambda;
            case Param::Beta1: return &beta1;
            case Param::Beta2: return &beta2;
            case Param::Pi: return &pi;
            case Param::SigmaZs: return &sigma_zs;
            case Param::AugmentEnabled: return nullptr;
        }
        return nullptr;
    }

    bool contains(const HyperParams& hp) const {
        return std::all_of(kAllParams.begin(), kAllParams.end(), [&](Param which) {
            const Range* r = range(which);
            return r == nullptr || r->contains(hp.get(which));
        });
    }
};

/// Parameters removed from the sampled space and held at fixed values.
/// Augmentation is enabled unless pinned off.
struct Constraints {
    std::map<Param, double> pinned;

    bool is_pinned(Param which) const { return pinned.count(which) != 0; }

    void check(const SearchSpace& space) const {
        for (const auto& [which, value] : pinned) {
            if (which == Param::AugmentEnabled) {
                detail::require(value == 0.0 || value == 1.0, ErrorCode::ConstraintConflict,
                                "augment_enabled must be pinned to 0 or 1");
                continue;
            }
            const Range* r = space.range(which);
            detail::require(r->contains(value), ErrorCode::ConstraintConflict,
                            std::string(to_string(which)) + " pinned to " + std::to_string(value) +
                                " outside its search range");
        }
    }
};

/// Draws every field in kAllParams order, then overwrites the pinned ones.
/// Drawing pinned fields too keeps the unpinned draws identical across variants.
inline HyperParams sample_params(std::mt19937_64& rng, const SearchSpace& space, const Constraints& constraints) {
    HyperParams hp;
    for (auto which : kAllParams) {
        if (const Range* r = space.range(which)) hp.set(which, r->sample(rng));
    }
    hp.augment_enabled = true;
    for (const auto& [which, value] : constraints.pinned) hp.set(which, value);
    return hp;
}

inline std::vector<std::uint64_t> trial_seeds(std::uint64_t seed, std::size_t budget) {
    std::mt19937_64 master(seed);
    std::vector<std::uint64_t> seeds(budget);
    for (auto& s : seeds) s = master();
    return seeds;
}

template <typename Params>
struct Trial {
    std::size_t trial_index = 0;
    Params params;
    double val_accuracy = 0.0;
    std::int64_t wall_time_ms = 0;
};

template <typename Params>
struct SearchHistory {
    std::vector<Trial<Params>> history;
    std::size_t best_index = 0;
    std::uint64_t seed = 0;

    const Trial<Params>& best() const { return history.at(best_index); }
};

struct RunOptions {
    unsigned threads = 1;  // 0 = hardware concurrency
};

/// Generic seeded random search. `sample(rng)` draws a candidate and
/// `score(params)` returns its validation accuracy. The best trial is the
/// highest score, ties going to the earliest index.
template <typename Params, typename Sample, typename Score>
SearchHistory<Params> random_search(std::size_t budget, std::uint64_t seed, Sample&& sample, Score&& score,
                                    const RunOptions& opts = {},
                                    const std::function<void(const Trial<Params>&)>& on_trial = {}) {
    detail::require(budget >= 1, ErrorCode::InvalidBudget, "budget must be >= 1");
    const auto seeds = trial_seeds(seed, budget);
    SearchHistory<Params> out;
    out.seed = seed;
    out.history.resize(budget);
    std::vector<std::exception_ptr> errors(budget);

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < budget; i = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                std::mt19937_64 rng(seeds[i]);
                Trial<Params> t;
                t.trial_index = i;
                t.params = sample(rng);
                t.val_accuracy = score(t.params);
                t.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
                out.history[i] = t;
                if (on_trial) {
                    std::lock_guard lock(log_mutex);
                    on_trial(t);
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, budget));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 1; i < budget; ++i) {
        if (out.history[i].val_accuracy > out.history[out.best_index].val_accuracy) out.best_index = i;
    }
    return out;
}

using TrialRecord = Trial<HyperParams>;

struct SearchResult : SearchHistory<HyperParams> {
    KernelKind kernel = KernelKind::MultiScaleRbf;
    Constraints constraints;
};

struct SearchConfig {
    SearchSpace space;
    Constraints constraints;
    KernelKind kernel = KernelKind::MultiScaleRbf;
    RunOptions run;
    std::function<void(const TrialRecord&)> on_trial;
};

inline double evaluate_split(const FittedPipeline& fitted, const Matrix& features, const LabelVector& labels) {
    return accuracy(fitted.classify(features), labels);
}

/// Runs `budget` pipeline fits scored on the bundle's validation split.
inline SearchResult run_search(const io::Bundle& bundle, std::size_t budget, std::uint64_t seed,
                               const SearchConfig& config = {}) {
    detail::require(budget >= 1, ErrorCode::InvalidBudget, "budget must be >= 1");
    config.constraints.check(config.space);
    auto sample = [&](std::mt19937_64& rng) { return sample_params(rng, config.space, config.constraints); };
    auto score = [&](const HyperParams& hp) {
        return evaluate_split(fit_pipeline(bundle, hp, config.kernel), bundle.val_features, bundle.val_labels);
    };
    SearchResult result;
    static_cast<SearchHistory<HyperParams>&>(result) =
        random_search<HyperParams>(budget, seed, sample, score, config.run, config.on_trial);
    result.kernel = config.kernel;
    result.constraints = config.constraints;
    return result;
}

// JSON form of a search. Wall times vary run to run and are only written
// when asked for, so the default serialization is byte-reproducible.

inline nlohmann::json trial_to_json(const TrialRecord& t, bool include_timing) {
    nlohmann::json j = {{"trial_index", t.trial_index}, {"params", t.params}, {"val_accuracy", t.val_accuracy}};
    if (include_timing) j["wall_time_ms"] = t.wall_time_ms;
    return j;
}

inline nlohmann::json to_json(const SearchResult& r, bool include_timing = false) {
    nlohmann::json pinned = nlohmann::json::object();
    for (const auto& [which, value] : r.constraints.pinned) pinned[std::string(to_string(which))] = value;
    nlohmann::json history = nlohmann::json::array();
    for (const auto& t : r.history) history.push_back(trial_to_json(t, include_timing));
    return {
        {"kind", "search_result"},
        {"seed", r.seed},
        {"budget", r.history.size()},
        {"kernel", std::string(to_string(r.kernel))},
        {"pinned", pinned},
        {"best_index", r.best_index},
        {"best", trial_to_json(r.best(), include_timing)},
        {"history", history},
    };
}

inline SearchResult search_result_from_json(const nlohmann::json& j) {
    SearchResult r;
    try {
        r.seed = j.at("seed").get<std::uint64_t>();
        const auto kind = parse_kernel_kind(j.at("kernel").get<std::string>());
        detail::require(kind.has_value(), ErrorCode::InvalidSpec, "unknown kernel");
        r.kernel = *kind;
        for (const auto& [key, value] : j.at("pinned").items()) {
            for (auto which : kAllParams) {
                if (key == to_string(which)) r.constraints.pinned[which] = value.get<double>();
            }
        }
        for (const auto& t : j.at("history")) {
            TrialRecord rec;
            rec.trial_index = t.at("trial_index").get<std::size_t>();
            rec.params = t.at("params").get<HyperParams>();
            rec.val_accuracy = t.at("val_accuracy").get<double>();
            rec.wall_time_ms = t.value("wall_time_ms", std::int64_t{0});
            r.history.push_back(rec);
        }
        r.best_index = j.at("best_index").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("search result JSON: ") + e.what());
    }
    detail::require(r.best_index < r.history.size(), ErrorCode::InvalidArgument, "best_index out of range");
    return r;
}

}  // namespace rehark
