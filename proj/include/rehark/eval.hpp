#pragma once

// Ablation orchestration, method comparison and report emission.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "core.hpp"
#include "io_bundle.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "search.hpp"

namespace rehark {

enum class AblationVariant { Full, NoRefine, NoMultiscale, NoRectify, NoAugment, NoPower, OnlyTextGpt, OnlyVisual };

inline constexpr std::array<AblationVariant, 8> kAllVariants{
    AblationVariant::Full,      AblationVariant::NoRefine, AblationVariant::NoMultiscale, AblationVariant::NoRectify,
    AblationVariant::NoAugment, AblationVariant::NoPower,  AblationVariant::OnlyTextGpt,  AblationVariant::OnlyVisual};

inline std::string_view to_string(AblationVariant v) {
    switch (v) {
        case AblationVariant::Full: return "full";
        case AblationVariant::NoRefine: return "no_refine";
        case AblationVariant::NoMultiscale: return "no_multiscale";
        case AblationVariant::NoRectify: return "no_rectify";
        case AblationVariant::NoAugment: return "no_augment";
        case AblationVariant::NoPower: return "no_power";
        case AblationVariant::OnlyTextGpt: return "only_text_gpt";
        case AblationVariant::OnlyVisual: return "only_visual";
    }
    return "unknown";
}

inline std::optional<AblationVariant> parse_variant(std::string_view name) {
    for (auto v : kAllVariants) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

inline Constraints constraints_for(AblationVariant v) {
    Constraints c;
    switch (v) {
        case AblationVariant::Full: break;
        case AblationVariant::NoRefine: c.pinned[Param::Omega] = 0.0; break;
        case AblationVariant::NoMultiscale: c.pinned[Param::Pi] = 1.0; break;
        case AblationVariant::NoRectify: c.pinned[Param::AlphaR] = 0.0; break;
        case AblationVariant::NoAugment: c.pinned[Param::AugmentEnabled] = 0.0; break;
        case AblationVariant::NoPower: c.pinned[Param::P] = 1.0; break;
        case AblationVariant::OnlyTextGpt:
            c.pinned[Param::Gamma] = 1.0;
            c.pinned[Param::Omega] = 0.0;
            break;
        case AblationVariant::OnlyVisual: c.pinned[Param::Omega] = 1.0; break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
    std::string method;
    std::vector<double> accuracies;  // fractions in [0,1], one per dataset
    double average = 0.0;
};

struct Report {
    std::vector<std::string> datasets;
    std::vector<ReportRow> rows;

    void add_row(std::string method, std::vector<double> accuracies) {
        detail::require(accuracies.size() == datasets.size(), ErrorCode::LengthMismatch,
                        "report row for " + method + " has " + std::to_string(accuracies.size()) + " values");
        double sum = 0.0;
        for (double a : accuracies) sum += a;
        const double avg = accuracies.empty() ? 0.0 : sum / static_cast<double>(accuracies.size());
        rows.push_back({std::move(method), std::move(accuracies), avg});
    }

    const ReportRow* find(std::string_view method) const {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.method == method; });
        return it == rows.end() ? nullptr : &*it;
    }
};

/// Concatenates dataset columns of reports sharing the same methods in the same order.
inline Report merge_reports(const std::vector<Report>& parts) {
    detail::require(!parts.empty(), ErrorCode::EmptyInput, "merge_reports");
    Report out;
    for (const auto& p : parts) out.datasets.insert(out.datasets.end(), p.datasets.begin(), p.datasets.end());
    for (std::size_t r = 0; r < parts.front().rows.size(); ++r) {
        std::vector<double> accs;
        for (const auto& p : parts) {
            detail::require(p.rows.size() == parts.front().rows.size() &&
                                p.rows[r].method == parts.front().rows[r].method,
                            ErrorCode::DimensionMismatch, "merge_reports: method rows differ");
            accs.insert(accs.end(), p.rows[r].accuracies.begin(), p.rows[r].accuracies.end());
        }
        out.add_row(parts.front().rows[r].method, std::move(accs));
    }
    return out;
}

enum class ReportFormat { Markdown, Csv, Json };

inline std::optional<ReportFormat> parse_report_format(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::Markdown;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    return std::nullopt;
}

inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

inline nlohmann::json to_json(const Report& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"method", row.method}, {"accuracies", row.accuracies}, {"average", row.average}});
    }
    return {{"kind", "report"}, {"datasets", r.datasets}, {"rows", rows}};
}

inline Report report_from_json(const nlohmann::json& j) {
    Report r;
    try {
        r.datasets = j.at("datasets").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            r.add_row(row.at("method").get<std::string>(), row.at("accuracies").get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("report JSON: ") + e.what());
    }
    return r;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

/// Renders a report. Column order: method, datasets in order, average.
inline std::string render_report(const Report& r, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Json: out << to_json(r).dump(2) << '\n'; break;
        case ReportFormat::Csv:
            out << "method";
            for (const auto& d : r.datasets) out << ',' << detail::csv_field(d);
            out << ",average\n";
            for (const auto& row : r.rows) {
                out << detail::csv_field(row.method);
                for (double a : row.accuracies) out << ',' << format_percent(a);
                out << ',' << format_percent(row.average) << '\n';
            }
            break;
        case ReportFormat::Markdown:
            out << "| Method |";
            for (const auto& d : r.datasets) out << ' ' << d << " |";
            out << " Average |\n|---|";
            for (std::size_t i = 0; i < r.datasets.size(); ++i) out << "---:|";
            out << "---:|\n";
            for (const auto& row : r.rows) {
                out << "| " << row.method << " |";
                for (double a : row.accuracies) out << ' ' << format_percent(a) << " |";
                out << ' ' << format_percent(row.average) << " |\n";
            }
            break;
    }
    return out.str();
}

inline void emit_report(const Report& r, ReportFormat format, const std::filesystem::path& path) {
    io::detail::write_file(path, render_report(r, format));
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationOutcome {
    Report report;
    std::vector<AblationVariant> variants;
    std::vector<SearchResult> searches;  // one per variant, same order
    std::vector<double> test_accuracies;
};

/// Test accuracy of the best validation trial of a search.
inline double test_accuracy_of(const io::Bundle& bundle, const HyperParams& hp, KernelKind kernel) {
    return evaluate_split(fit_pipeline(bundle, hp, kernel), bundle.test_features, bundle.test_labels);
}

/// Re-runs the full search once per variant with that variant's pinned
/// parameters and scores each winner on the test split.
inline AblationOutcome run_ablation(const io::Bundle& bundle, std::size_t budget, std::uint64_t seed,
                                    const std::vector<AblationVariant>& variants, SearchConfig config = {}) {
    detail::require(!variants.empty(), ErrorCode::EmptyInput, "no ablation variants");
    AblationOutcome out;
    out.report.datasets = {bundle.name};
    for (auto v : variants) {
        config.constraints = constraints_for(v);
        auto search = run_search(bundle, budget, seed, config);
        const double acc = test_accuracy_of(bundle, search.best().params, config.kernel);
        out.report.add_row(std::string(to_string(v)), {acc});
        out.variants.push_back(v);
        out.searches.push_back(std::move(search));
        out.test_accuracies.push_back(acc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Method comparison

/// Tuned configuration of the cache baseline.
struct NwCandidate {
    double p = 1.0;
    double gamma = 0.0;
    double sigma_zs = 1.0;
    NwParams nw;
};

struct NwSpace {
    Range p{0.5, 1.0};
    Range gamma{0.0, 1.0};
    Range sigma_zs{0.5, 10.0};
    Range beta_nw{0.5, 50.0, true};
    Range mix{0.0, 10.0};

    NwCandidate sample(std::mt19937_64& rng) const {
        NwCandidate c;
        c.p = p.sample(rng);
        c.gamma = gamma.sample(rng);
        c.sigma_zs = sigma_zs.sample(rng);
        c.nw.beta_nw = beta_nw.sample(rng);
        c.nw.mix = mix.sample(rng);
        return c;
    }
};

inline Matrix onehot(const LabelVector& labels, std::size_t n_classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return y;
}

inline LabelVector nw_predict(const io::Bundle& b, const NwCandidate& c, const Matrix& raw_queries) {
    const Matrix support = preprocess(b.support_features, c.p);
    const Matrix w_text = blend_text_priors(preprocess(b.w_clip, c.p), preprocess(b.w_gpt3, c.p), c.gamma);
    return nw_classify(preprocess(raw_queries, c.p), support, onehot(b.support_labels, b.n_classes), w_text, c.nw,
                       c.sigma_zs);
}

/// Untuned CLIP zero-shot: raw features and CLIP text weights, cosine argmax.
inline LabelVector zero_shot_predict(const io::Bundle& b, const Matrix& raw_queries) {
    return zero_shot_classify(l2_normalize(raw_queries), l2_normalize(b.w_clip), 1.0);
}

struct CompareOutcome {
    Report report;
    SearchResult rehark;
    SearchHistory<NwCandidate> nw;
};

inline constexpr std::string_view kZeroShotRow = "ZeroShot";
inline constexpr std::string_view kNwRow = "NW";
inline constexpr std::string_view kReharkRow = "ReHARK";

/// Zero-shot, tuned cache baseline and tuned full pipeline on the test split.
/// Both tuned methods get the same budget and seed.
inline CompareOutcome compare_methods(const io::Bundle& bundle, std::size_t budget, std::uint64_t seed,
                                      SearchConfig config = {}, const NwSpace& nw_space = {}) {
    CompareOutcome out;
    out.report.datasets = {bundle.name};

    out.report.add_row(std::string(kZeroShotRow),
                       {accuracy(zero_shot_predict(bundle, bundle.test_features), bundle.test_labels)});

    out.nw = random_search<NwCandidate>(
        budget, seed, [&](std::mt19937_64& rng) { return nw_space.sample(rng); },
        [&](const NwCandidate& c) { return accuracy(nw_predict(bundle, c, bundle.val_features), bundle.val_labels); },
        config.run);
    out.report.add_row(std::string(kNwRow),
                       {accuracy(nw_predict(bundle, out.nw.best().params, bundle.test_features), bundle.test_labels)});

    config.constraints = constraints_for(AblationVariant::Full);
    out.rehark = run_search(bundle, budget, seed, config);
    out.report.add_row(std::string(kReharkRow), {test_accuracy_of(bundle, out.rehark.best().params, config.kernel)});
    return out;
}

}  // namespace rehark
