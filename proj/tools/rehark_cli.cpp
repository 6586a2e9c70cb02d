// rehark: command-line front end for bundle validation, adaptation, search,
// ablation, method comparison and report formatting.
//
// Exit codes: 0 success, 1 validation/runtime error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <rehark/rehark.hpp>

namespace {

using namespace rehark;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        std::cout.flush();
    } else {
        io::detail::write_file(out_path, text);
    }
}

KernelKind kernel_from(const std::string& name) {
    const auto kind = parse_kernel_kind(name);
    if (!kind) throw UsageError("--kernel: unknown kernel '" + name + "'");
    return *kind;
}

ReportFormat format_from(const std::string& name) {
    const auto f = parse_report_format(name);
    if (!f) throw UsageError("--format: unknown format '" + name + "' (markdown, csv, json)");
    return *f;
}

std::vector<AblationVariant> variants_from(const std::vector<std::string>& names) {
    std::vector<AblationVariant> out;
    for (const auto& n : names) {
        const auto v = parse_variant(n);
        if (!v) throw UsageError("--variants: unknown variant '" + n + "'");
        out.push_back(*v);
    }
    return out;
}

struct Common {
    std::vector<std::string> bundles;
    std::uint64_t seed = 0;
    std::size_t budget = 1000;
    std::string out;
    std::string format = "markdown";
    std::string kernel = "multiscale_rbf";
    unsigned threads = 0;
    bool verbose = false;

    SearchConfig search_config() const {
        SearchConfig cfg;
        cfg.kernel = kernel_from(kernel);
        cfg.run.threads = threads;
        if (verbose) {
            cfg.on_trial = [](const TrialRecord& t) {
                std::cerr << "trial " << t.trial_index << " val_accuracy=" << t.val_accuracy
                          << " time_ms=" << t.wall_time_ms << '\n';
            };
        }
        return cfg;
    }
};

void add_bundle(CLI::App& cmd, Common& c, bool many) {
    auto* opt = cmd.add_option("--bundle", c.bundles, many ? "Bundle manifest (repeatable)" : "Bundle manifest");
    opt->required();
    if (!many) opt->expected(1);
}

void add_search_flags(CLI::App& cmd, Common& c) {
    cmd.add_option("--seed", c.seed, "Seed for all stochastic behavior")->capture_default_str();
    cmd.add_option("--budget", c.budget, "Trials per search")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--kernel", c.kernel, "linear | laplacian | rbf | multiscale_rbf")->capture_default_str();
    cmd.add_option("--threads", c.threads, "Worker threads, 0 = auto")->capture_default_str();
    cmd.add_flag("--verbose", c.verbose, "Log one line per trial to stderr");
}

int cmd_validate(const Common& c) {
    const auto b = io::load_bundle(c.bundles.front());
    std::cout << "ok " << b.name << ": N=" << b.n_classes << " K=" << b.n_shots << " d=" << b.dim
              << " support=" << b.support_features.rows() << " val=" << b.val_features.rows()
              << " test=" << b.test_features.rows() << '\n';
    return 0;
}

int cmd_adapt(const Common& c, const std::string& params_path, const std::string& model_out) {
    const auto b = io::load_bundle(c.bundles.front());
    HyperParams hp;
    try {
        hp = nlohmann::json::parse(io::detail::read_file(params_path)).get<HyperParams>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, params_path + ": " + e.what());
    }
    const KernelKind kind = kernel_from(c.kernel);
    const auto fitted = fit_pipeline(b, hp, kind);
    const double val = evaluate_split(fitted, b.val_features, b.val_labels);
    const double test = evaluate_split(fitted, b.test_features, b.test_labels);
    if (!model_out.empty()) save_model(fitted.model, model_out);
    const nlohmann::json result = {{"kind", "adapt_result"},       {"bundle", b.name},
                                   {"kernel", to_string(kind)},    {"params", hp},
                                   {"val_accuracy", val},          {"test_accuracy", test},
                                   {"n_val", b.val_labels.size()}, {"n_test", b.test_labels.size()}};
    write_output(c.out, result.dump(2) + "\n");
    return 0;
}

int cmd_search(const Common& c, const std::string& variant, bool timing) {
    const auto b = io::load_bundle(c.bundles.front());
    auto cfg = c.search_config();
    cfg.constraints = constraints_for(variants_from({variant}).front());
    const auto result = run_search(b, c.budget, c.seed, cfg);
    std::cerr << "best trial " << result.best_index << " val_accuracy=" << result.best().val_accuracy << '\n';
    write_output(c.out, to_json(result, timing).dump(2) + "\n");
    return 0;
}

int cmd_ablate(const Common& c, const std::vector<std::string>& variant_names) {
    const auto variants = variants_from(variant_names);
    const auto format = format_from(c.format);
    std::vector<Report> parts;
    for (const auto& path : c.bundles) {
        parts.push_back(run_ablation(io::load_bundle(path), c.budget, c.seed, variants, c.search_config()).report);
    }
    write_output(c.out, render_report(merge_reports(parts), format));
    return 0;
}

int cmd_compare(const Common& c) {
    const auto format = format_from(c.format);
    std::vector<Report> parts;
    for (const auto& path : c.bundles) {
        parts.push_back(compare_methods(io::load_bundle(path), c.budget, c.seed, c.search_config()).report);
    }
    write_output(c.out, render_report(merge_reports(parts), format));
    return 0;
}

/// Re-renders a report JSON; a search result JSON becomes a per-trial table.
int cmd_report(const Common& c, const std::string& in_path) {
    const auto format = format_from(c.format);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::detail::read_file(in_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, in_path + ": " + e.what());
    }
    const std::string kind = j.value("kind", "report");
    if (kind == "report") {
        write_output(c.out, render_report(report_from_json(j), format));
        return 0;
    }
    if (kind != "search_result") throw Error(ErrorCode::InvalidArgument, "unrecognized results kind '" + kind + "'");

    const auto r = search_result_from_json(j);
    if (format == ReportFormat::Json) {
        write_output(c.out, to_json(r).dump(2) + "\n");
        return 0;
    }
    // Running best against trial count, for budget-sensitivity plots.
    std::ostringstream out;
    const bool csv = format == ReportFormat::Csv;
    out << (csv ? "trial,val_accuracy,best_so_far\n" : "| Trial | Val accuracy | Best so far |\n|---:|---:|---:|\n");
    double best = 0.0;
    for (const auto& t : r.history) {
        best = std::max(best, t.val_accuracy);
        if (csv) {
            out << t.trial_index << ',' << format_percent(t.val_accuracy) << ',' << format_percent(best) << '\n';
        } else {
            out << "| " << t.trial_index << " | " << format_percent(t.val_accuracy) << " | " << format_percent(best)
                << " |\n";
        }
    }
    write_output(c.out, out.str());
    return 0;
}

int cmd_synth(const SyntheticConfig& cfg, const std::string& dir) {
    const auto path = io::save_bundle(make_synthetic_bundle(cfg), dir);
    std::cout << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free few-shot adaptation with hybrid priors and multi-scale RBF proximal KRR"};
    app.require_subcommand(1);

    Common c;
    std::string params_path, model_out, in_path, variant = "full";
    std::vector<std::string> variant_names{"full"};
    bool timing = false;

    auto* validate = app.add_subcommand("validate", "Check a bundle against every format invariant");
    add_bundle(*validate, c, false);

    auto* adapt = app.add_subcommand("adapt", "Fit with explicit hyperparameters and report accuracy");
    add_bundle(*adapt, c, false);
    adapt->add_option("--params", params_path, "HyperParams JSON file")->required();
    adapt->add_option("--kernel", c.kernel, "linear | laplacian | rbf | multiscale_rbf")->capture_default_str();
    adapt->add_option("--out", c.out, "Result JSON path (default stdout)");
    adapt->add_option("--model-out", model_out, "Directory to save the fitted model");

    auto* search = app.add_subcommand("search", "Seeded hyperparameter search on the validation split");
    add_bundle(*search, c, false);
    add_search_flags(*search, c);
    search->add_option("--out", c.out, "SearchResult JSON path (default stdout)");
    search->add_option("--variant", variant, "Ablation constraints to apply")->capture_default_str();
    search->add_flag("--timing", timing, "Include per-trial wall times in the JSON");

    auto* ablate = app.add_subcommand("ablate", "Re-run the search under each ablation variant");
    add_bundle(*ablate, c, true);
    add_search_flags(*ablate, c);
    ablate->add_option("--variants", variant_names, "Comma-separated variants")->delimiter(',')->capture_default_str();
    ablate->add_option("--format", c.format, "markdown | csv | json")->capture_default_str();
    ablate->add_option("--out", c.out, "Report path (default stdout)");

    auto* compare = app.add_subcommand("compare", "Zero-shot vs cache baseline vs full pipeline");
    add_bundle(*compare, c, true);
    add_search_flags(*compare, c);
    compare->add_option("--format", c.format, "markdown | csv | json")->capture_default_str();
    compare->add_option("--out", c.out, "Report path (default stdout)");

    auto* report = app.add_subcommand("report", "Re-format a results JSON");
    report->add_option("--in", in_path, "Report or search result JSON")->required();
    report->add_option("--format", c.format, "markdown | csv | json")->capture_default_str();
    report->add_option("--out", c.out, "Output path (default stdout)");

    SyntheticConfig synth_cfg;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-mixture bundle");
    synth->add_option("--out", synth_dir, "Output directory")->required();
    synth->add_option("--name", synth_cfg.name)->capture_default_str();
    synth->add_option("--classes", synth_cfg.n_classes)->capture_default_str();
    synth->add_option("--dim", synth_cfg.dim)->capture_default_str();
    synth->add_option("--shots", synth_cfg.shots)->capture_default_str();
    synth->add_option("--val-per-class", synth_cfg.val_per_class)->capture_default_str();
    synth->add_option("--test-per-class", synth_cfg.test_per_class)->capture_default_str();
    synth->add_option("--sample-noise", synth_cfg.sample_noise)->capture_default_str();
    synth->add_option("--clip-noise", synth_cfg.clip_noise)->capture_default_str();
    synth->add_option("--gpt3-noise", synth_cfg.gpt3_noise)->capture_default_str();
    synth->add_option("--query-shift", synth_cfg.query_shift)->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(c);
        if (*adapt) return cmd_adapt(c, params_path, model_out);
        if (*search) return cmd_search(c, variant, timing);
        if (*ablate) return cmd_ablate(c, variant_names);
        if (*compare) return cmd_compare(c);
        if (*report) return cmd_report(c, in_path);
        if (*synth) return cmd_synth(synth_cfg, synth_dir);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
