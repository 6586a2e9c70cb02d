// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <rehark/rehark.hpp>

#include "oracle.hpp"
#include "test_util.hpp"

using namespace rehark;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && out_.pass) {
            out_.pass = false;
            out_.detail = what;
        }
    }
    void note(const std::string& s) {
        if (out_.pass) out_.detail = s;
    }
    Outcome result() const { return out_; }

private:
    Outcome out_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Benefit-ordering fixture: 10 classes in 32-d, weak CLIP text weights,
// somewhat better GPT-3 weights, one noisy shot per class and a shared query
// offset of norm 1.
io::Bundle benefit_fixture() {
    return make_synthetic_bundle({.name = "mixture",
                                  .n_classes = 10,
                                  .dim = 32,
                                  .shots = 1,
                                  .val_per_class = 10,
                                  .test_per_class = 50,
                                  .sample_noise = 1.5,
                                  .clip_noise = 2.0,
                                  .gpt3_noise = 1.2,
                                  .query_shift = 1.0,
                                  .seed = 0});
}

io::Bundle small_fixture() {
    return make_synthetic_bundle(
        {.n_classes = 3, .dim = 8, .val_per_class = 10, .test_per_class = 20, .sample_noise = 0.8, .query_shift = 0.4, .seed = 1});
}

Outcome kernel_correctness() {
    Check check;
    const auto t0 = Clock::now();
    double worst_asym = 0.0, worst_eig = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix x = testutil::random_unit_rows(30, 16, 1000 + seed);
        std::mt19937_64 rng(seed);
        const double b1 = Range{0.5, 50.0, true}.sample(rng);
        const double b2 = Range{0.5, 50.0, true}.sample(rng);
        const double pi = uniform01(rng);
        for (auto kind : {KernelKind::Linear, KernelKind::Laplacian, KernelKind::Rbf, KernelKind::MultiScaleRbf}) {
            const Matrix k = gram(x, KernelSpec{kind, b1, b2, pi});
            worst_asym = std::max(worst_asym, max_abs(k - k.transpose()));
            const Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
            worst_eig = std::min(worst_eig, eig.eigenvalues().minCoeff());
        }
        const double collapse = max_abs(gram(x, KernelSpec{KernelKind::MultiScaleRbf, b1, b2, 1.0}) -
                                        gram(x, KernelSpec{KernelKind::Rbf, b1}));
        const Matrix y = testutil::random_unit_rows(7, 16, 2000 + seed);
        const double collapse_xy = max_abs(gram(x, y, KernelSpec{KernelKind::MultiScaleRbf, b1, b2, 1.0}) -
                                           gram(x, y, KernelSpec{KernelKind::Rbf, b1}));
        check.expect(collapse == 0.0 && collapse_xy == 0.0, "pi=1 multi-scale differs from rbf");
    }
    const double t = seconds_since(t0);
    check.expect(worst_asym <= 1e-6, fmt("asymmetry %.3g > 1e-6", worst_asym));
    check.expect(worst_eig >= -1e-6, fmt("min eigenvalue %.3g < -1e-6", worst_eig));
    check.expect(t < 1.0, fmt("runtime %.3fs >= 1s", t));
    check.note(fmt("max asymmetry %.2g, min eigenvalue %.2g, %.3fs", worst_asym, worst_eig, t));
    return check.result();
}

Outcome closed_form_solve() {
    Check check;
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const LabelVector labels{0, 1, 2, 3, 4};
        const Matrix s = testutil::random_unit_rows(5, 16, 3000 + seed);
        const Matrix w = testutil::random_unit_rows(5, 16, 4000 + seed);
        std::mt19937_64 rng(seed);
        const auto hp = sample_params(rng, {}, {});
        const auto aug = augment(s, labels, make_bridges(s, labels, w, hp.eta), true, 5);
        const KernelSpec spec = hp.kernel(KernelKind::MultiScaleRbf);
        const auto model = fit(aug, w, spec, hp.lambda, hp.sigma_zs);
        check.expect(model.alpha_coef.rows() == 10 && model.alpha_coef.cols() == 5, "alpha is not 10x5");

        const auto rows = oracle::to_rows(aug.features);
        oracle::Rows a(10, std::vector<double>(10)), b(10, std::vector<double>(5));
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 10; ++j) {
                a[i][j] = oracle::kernel(oracle::Kind::MultiScaleRbf, rows[i], rows[j], hp.beta1, hp.beta2, hp.pi) +
                          (i == j ? hp.lambda : 0.0);
            }
            for (std::size_t c = 0; c < 5; ++c) {
                const std::vector<double> wc(w.row(c).data(), w.row(c).data() + w.cols());
                b[i][c] = aug.labels_onehot(i, c) - hp.sigma_zs * oracle::dot(rows[i], wc);
            }
        }
        const Matrix expected = oracle::to_matrix(oracle::dense_solve(a, b));
        worst = std::max(worst, (model.alpha_coef - expected).norm() / expected.norm());
    }
    const double t = seconds_since(t0);
    check.expect(worst <= 1e-8, fmt("relative deviation %.3g > 1e-8", worst));
    check.expect(t < 1.0, fmt("runtime %.3fs >= 1s", t));
    check.note(fmt("max relative deviation %.2g over 50 systems, %.3fs", worst, t));
    return check.result();
}

Outcome proximal_limit() {
    Check check;
    const auto t0 = Clock::now();
    const auto b = small_fixture();
    HyperParams hp{.p = 0.8, .gamma = 0.4, .omega = 0.3, .eta = 0.8, .alpha_r = 0.5, .lambda = 1.0,
                   .beta1 = 3.0, .beta2 = 0.7, .pi = 0.5, .sigma_zs = 2.0, .augment_enabled = true};
    auto gap_at = [&](double lambda) {
        hp.lambda = lambda;
        const auto fitted = fit_pipeline(b, hp, KernelKind::MultiScaleRbf);
        const Matrix q = fitted.prepare_queries(b.test_features);
        return (predict(fitted.model, q) - zero_shot_logits(q, fitted.model.w_prior, hp.sigma_zs)).norm();
    };
    std::ostringstream gaps;
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-2, 1.0, 1e2, 1e4}) {
        const double g = gap_at(lambda);
        check.expect(g <= prev, fmt("gap increased at lambda=%.0e", lambda));
        gaps << g << ' ';
        prev = g;
    }
    const double far = gap_at(1e6);
    const double t = seconds_since(t0);
    check.expect(far < 1e-3, fmt("gap %.3g at lambda=1e6 not < 1e-3", far));
    check.expect(t < 1.0, fmt("runtime %.3fs >= 1s", t));
    check.note("gaps " + gaps.str() + fmt("| lambda=1e6: %.2g, %.3fs", far, t));
    return check.result();
}

Outcome ablation_identities() {
    Check check;
    const auto b = small_fixture();
    std::mt19937_64 rng(5);
    for (int draw = 0; draw < 10; ++draw) {
        HyperParams hp = sample_params(rng, {}, {});

        // NO_Refine: the refined prior is the text prior, exactly.
        HyperParams no_refine = hp;
        no_refine.omega = 0.0;
        const auto fr = fit_pipeline(b, no_refine, KernelKind::MultiScaleRbf);
        check.expect(fr.model.w_prior == fr.w_text, "omega=0 prior differs from W_text");

        // NO_POWER: p = 1 equals a pipeline that never applies the power stage.
        HyperParams no_power = hp;
        no_power.p = 1.0;
        const Matrix with_stage = fit_pipeline(b, no_power, KernelKind::MultiScaleRbf).logits(b.test_features);
        const Matrix support = l2_normalize(b.support_features);
        const Matrix w_text = blend_text_priors(l2_normalize(b.w_clip), l2_normalize(b.w_gpt3), hp.gamma);
        const Matrix w_prior = refine_prior(w_text, visual_prototypes(support, b.support_labels, b.n_classes), hp.omega);
        const auto s_aug = augment(support, b.support_labels, make_bridges(support, b.support_labels, w_prior, hp.eta),
                                   true, b.n_classes);
        const auto model = fit(s_aug, w_prior, hp.kernel(KernelKind::MultiScaleRbf), hp.lambda, hp.sigma_zs);
        const Matrix skipped = predict(model, rectify(b.test_features, s_aug.features, hp.alpha_r));
        check.expect(with_stage == skipped, "p=1 pipeline differs from the pipeline without a power stage");

        // NO_RECTIFY: queries are only normalized.
        HyperParams no_rectify = hp;
        no_rectify.alpha_r = 0.0;
        const auto fq = fit_pipeline(b, no_rectify, KernelKind::MultiScaleRbf);
        check.expect(fq.prepare_queries(b.test_features) == l2_normalize(power_transform(b.test_features, hp.p)),
                     "alpha_r=0 queries differ from norm(x)");

        // eta = 0: bridges reproduce the support.
        const Matrix sp = preprocess(b.support_features, hp.p);
        const double bridge_gap = max_abs(make_bridges(sp, b.support_labels, fr.model.w_prior, 0.0) - sp);
        check.expect(bridge_gap <= 1e-6, fmt("eta=0 bridges deviate by %.3g", bridge_gap));
    }
    check.note("NO_Refine, NO_POWER, NO_RECTIFY, eta=0 identities hold over 10 parameter draws");
    return check.result();
}

Outcome end_to_end_oracle() {
    Check check;
    const auto b = make_synthetic_bundle(
        {.n_classes = 3, .dim = 8, .val_per_class = 5, .test_per_class = 10, .sample_noise = 0.8, .query_shift = 0.5, .seed = 7});
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        const auto hp = sample_params(rng, {}, {});
        const Matrix got = fit_pipeline(b, hp, KernelKind::MultiScaleRbf).logits(b.test_features);
        const auto expected = oracle::pipeline_logits(
            oracle::to_rows(b.support_features), b.support_labels, oracle::to_rows(b.w_clip), oracle::to_rows(b.w_gpt3),
            oracle::to_rows(b.test_features), b.n_classes,
            {hp.p, hp.gamma, hp.omega, hp.eta, hp.alpha_r, hp.lambda, hp.beta1, hp.beta2, hp.pi, hp.sigma_zs, true},
            oracle::Kind::MultiScaleRbf);
        worst = std::max(worst, max_abs(got - oracle::to_matrix(expected)));
    }
    check.expect(worst <= 1e-6, fmt("max logit deviation %.3g > 1e-6", worst));
    check.note(fmt("max logit deviation %.2g over 10 draws", worst));
    return check.result();
}

Outcome search_determinism_and_budget() {
    Check check;
    const auto b = benefit_fixture();
    const std::string first = to_json(run_search(b, 50, 0)).dump();
    const std::string second = to_json(run_search(b, 50, 0)).dump();
    check.expect(first == second, "identical seeds gave different SearchResult JSON");

    const auto t0 = Clock::now();
    const auto large = run_search(b, 500, 0);
    const double t = seconds_since(t0);
    const auto small = search_result_from_json(nlohmann::json::parse(first));
    for (std::size_t i = 0; i < 50; ++i) {
        check.expect(small.history[i].params == large.history[i].params &&
                         small.history[i].val_accuracy == large.history[i].val_accuracy,
                     "budget-50 history is not a prefix of the budget-500 history");
    }
    check.expect(large.best().val_accuracy >= small.best().val_accuracy, "best accuracy dropped with more budget");
    check.expect(t < 60.0, fmt("budget-500 search took %.1fs >= 60s", t));
    check.note(fmt("best val acc %.4f (50) -> %.4f (500), budget-500 in %.2fs", small.best().val_accuracy,
                   large.best().val_accuracy, t));
    return check.result();
}

Outcome benefit_ordering() {
    Check check;
    const auto b = benefit_fixture();
    const auto out = compare_methods(b, 200, 0);
    const double zs = out.report.find(kZeroShotRow)->average;
    const double nw = out.report.find(kNwRow)->average;
    const double full = out.report.find(kReharkRow)->average;
    check.expect(full - nw >= 0.01, fmt("ReHARK %.4f not >= NW %.4f + 1 point", full, nw));
    check.expect(nw - zs >= 0.01, fmt("NW %.4f not >= ZeroShot %.4f + 1 point", nw, zs));
    check.note(fmt("test accuracy ReHARK %.2f%%, NW %.2f%%, ZeroShot %.2f%%", 100 * full, 100 * nw, 100 * zs));
    return check.result();
}

// Real-feature reproduction needs bundles from the extractor; it is reported
// when REHARK_BENCH_BUNDLES names them (colon-separated) and never gates.
void benchmark_stretch() {
    const char* env = std::getenv("REHARK_BENCH_BUNDLES");
    if (env == nullptr || *env == '\0') {
        std::printf("[SKIP] benchmark-stretch: set REHARK_BENCH_BUNDLES to extractor manifests (not a gate)\n");
        return;
    }
    std::vector<Report> parts;
    std::stringstream ss(env);
    for (std::string path; std::getline(ss, path, ':');) {
        parts.push_back(compare_methods(io::load_bundle(path), 1000, 0).report);
    }
    const double avg = merge_reports(parts).find(kReharkRow)->average * 100.0;
    const bool near = std::abs(avg - 65.83) <= 1.5;
    std::printf("[%s] benchmark-stretch: ReHARK average %.2f%% vs 65.83%% +/- 1.5 (informational)\n",
                near ? "INFO-PASS" : "INFO-MISS", avg);
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"kernel-correctness", kernel_correctness},
        {"closed-form-solve", closed_form_solve},
        {"proximal-limit", proximal_limit},
        {"ablation-identities", ablation_identities},
        {"end-to-end-oracle", end_to_end_oracle},
        {"search-determinism-budget", search_determinism_and_budget},
        {"synthetic-benefit-ordering", benefit_ordering},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    benchmark_stretch();
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
                std::size(criteria));
    return failures == 0 ? 0 : 1;
}
