#include <sstream>

#include <gtest/gtest.h>

#include <rehark/eval.hpp>
#include <rehark/synthetic.hpp>

#include "test_util.hpp"

using namespace rehark;

namespace {

io::Bundle small_bundle() {
    return make_synthetic_bundle({.n_classes = 4, .dim = 12, .val_per_class = 8, .test_per_class = 10,
                                  .sample_noise = 1.2, .clip_noise = 1.5, .gpt3_noise = 1.0, .query_shift = 0.5});
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Accuracy, Examples) {
    EXPECT_EQ(accuracy({0, 1, 2}, {0, 1, 2}), 1.0);
    EXPECT_EQ(accuracy({1, 2, 0}, {0, 1, 2}), 0.0);
    EXPECT_EQ(accuracy({0, 1, 2, 2}, {0, 1, 1, 2}), 0.75);
    try {
        accuracy({0, 1}, {0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
    try {
        accuracy({}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
    }
}

TEST(Variants, NamesAndPins) {
    for (auto v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
    EXPECT_FALSE(parse_variant("no_such").has_value());
    EXPECT_TRUE(constraints_for(AblationVariant::Full).pinned.empty());
    EXPECT_EQ(constraints_for(AblationVariant::NoRefine).pinned.at(Param::Omega), 0.0);
    EXPECT_EQ(constraints_for(AblationVariant::NoMultiscale).pinned.at(Param::Pi), 1.0);
    EXPECT_EQ(constraints_for(AblationVariant::NoRectify).pinned.at(Param::AlphaR), 0.0);
    EXPECT_EQ(constraints_for(AblationVariant::NoAugment).pinned.at(Param::AugmentEnabled), 0.0);
    EXPECT_EQ(constraints_for(AblationVariant::NoPower).pinned.at(Param::P), 1.0);
    EXPECT_EQ(constraints_for(AblationVariant::OnlyTextGpt).pinned.at(Param::Gamma), 1.0);
    EXPECT_EQ(constraints_for(AblationVariant::OnlyTextGpt).pinned.at(Param::Omega), 0.0);
    EXPECT_EQ(constraints_for(AblationVariant::OnlyVisual).pinned.at(Param::Omega), 1.0);
}

TEST(RunAblation, SingleVariantSingleRow) {
    const auto out = run_ablation(small_bundle(), 10, 1, {AblationVariant::Full});
    ASSERT_EQ(out.report.rows.size(), 1u);
    EXPECT_EQ(out.report.rows[0].method, "full");
    EXPECT_EQ(out.report.datasets, std::vector<std::string>{"synthetic"});
}

TEST(RunAblation, PinningIsTotal) {
    const std::vector<AblationVariant> variants(kAllVariants.begin(), kAllVariants.end());
    const auto out = run_ablation(small_bundle(), 25, 3, variants);
    ASSERT_EQ(out.searches.size(), variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto pins = constraints_for(variants[i]).pinned;
        for (const auto& t : out.searches[i].history) {
            for (const auto& [which, value] : pins) EXPECT_EQ(t.params.get(which), value) << to_string(variants[i]);
        }
    }
    const auto& nm = out.searches[2];
    ASSERT_EQ(out.variants[2], AblationVariant::NoMultiscale);
    for (const auto& t : nm.history) EXPECT_EQ(t.params.pi, 1.0);
}

TEST(RunAblation, RectificationHelpsUnderQueryShift) {
    const auto b = make_synthetic_bundle({.n_classes = 10, .dim = 32, .val_per_class = 10, .test_per_class = 50,
                                          .sample_noise = 1.0, .clip_noise = 1.5, .gpt3_noise = 1.2,
                                          .query_shift = 2.0, .seed = 2});
    const auto out = run_ablation(b, 200, 0, {AblationVariant::Full, AblationVariant::NoRectify});
    EXPECT_GT(out.test_accuracies[0], out.test_accuracies[1]);
}

TEST(CompareMethods, SupportSignalBeatsZeroShot) {
    const auto b = make_synthetic_bundle({.n_classes = 6, .dim = 16, .val_per_class = 10, .test_per_class = 30,
                                          .sample_noise = 0.6, .clip_noise = 2.0, .gpt3_noise = 2.0, .seed = 3});
    const auto out = compare_methods(b, 100, 0);
    ASSERT_EQ(out.report.rows.size(), 3u);
    EXPECT_GE(out.report.find(kReharkRow)->average, out.report.find(kZeroShotRow)->average);
}

TEST(CompareMethods, SaturatedBundleIsPerfectForAll) {
    auto b = make_synthetic_bundle({.n_classes = 4, .dim = 10, .seed = 4});
    b.val_features = b.w_clip;
    b.val_labels = {0, 1, 2, 3};
    b.test_features = b.w_clip;
    b.test_labels = {0, 1, 2, 3};
    b.w_gpt3 = b.w_clip;
    const auto out = compare_methods(b, 50, 0);
    for (const auto& row : out.report.rows) EXPECT_EQ(row.average, 1.0) << row.method;
}

TEST(CompareMethods, Deterministic) {
    const auto b = small_bundle();
    SearchConfig threaded;
    threaded.run.threads = 3;
    const auto x = compare_methods(b, 20, 5);
    const auto y = compare_methods(b, 20, 5, threaded);
    EXPECT_EQ(to_json(x.report).dump(), to_json(y.report).dump());
    EXPECT_EQ(to_json(x.rehark).dump(), to_json(y.rehark).dump());
}

TEST(Report, AverageMatchesIndependentMean) {
    Report r;
    r.datasets = {"a", "b", "c"};
    r.add_row("m1", {0.1, 0.2, 0.4});
    r.add_row("m2", {0.99, 0.5, 0.3333});
    for (const auto& row : r.rows) {
        long double sum = 0;
        for (double a : row.accuracies) sum += a;
        EXPECT_NEAR(row.average, static_cast<double>(sum / 3), 1e-9);
    }
    EXPECT_THROW(r.add_row("bad", {0.1}), Error);
}

TEST(Report, CsvLayout) {
    Report r;
    r.datasets = {"EuroSAT"};
    r.add_row("full", {0.69191});
    const auto out = lines(render_report(r, ReportFormat::Csv));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], "method,EuroSAT,average");
    EXPECT_EQ(out[1], "full,69.19,69.19");
    EXPECT_EQ(render_report(r, ReportFormat::Csv).find('\r'), std::string::npos);

    Report quoted;
    quoted.datasets = {"a,b"};
    quoted.add_row("x\"y", {1.0});
    EXPECT_EQ(lines(render_report(quoted, ReportFormat::Csv))[0], "method,\"a,b\",average");
    EXPECT_EQ(lines(render_report(quoted, ReportFormat::Csv))[1], "\"x\"\"y\",100.00,100.00");
}

TEST(Report, MarkdownColumnCountsAgree) {
    Report r;
    r.datasets = {"A", "B"};
    r.add_row("ZeroShot", {0.5, 0.25});
    r.add_row("ReHARK", {0.75, 0.5});
    const auto out = lines(render_report(r, ReportFormat::Markdown));
    ASSERT_EQ(out.size(), 4u);
    for (const auto& line : out) EXPECT_EQ(std::count(line.begin(), line.end(), '|'), 5) << line;
    EXPECT_EQ(out[3], "| ReHARK | 75.00 | 50.00 | 62.50 |");
}

TEST(Report, JsonParsesBackExactly) {
    Report r;
    r.datasets = {"d1", "d2"};
    r.add_row("a", {0.1234567890123, 1.0 / 3.0});
    r.add_row("b", {0.0, 0.7});
    const Report back = report_from_json(nlohmann::json::parse(render_report(r, ReportFormat::Json)));
    EXPECT_EQ(back.datasets, r.datasets);
    ASSERT_EQ(back.rows.size(), r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].method, r.rows[i].method);
        EXPECT_EQ(back.rows[i].accuracies, r.rows[i].accuracies);
        EXPECT_EQ(back.rows[i].average, r.rows[i].average);
    }
}

TEST(Report, EmitWritesFileAndMergesColumns) {
    testutil::TempDir dir("report");
    Report a, b;
    a.datasets = {"x"};
    a.add_row("m", {0.5});
    b.datasets = {"y"};
    b.add_row("m", {1.0});
    const Report merged = merge_reports({a, b});
    EXPECT_EQ(merged.datasets, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(merged.rows[0].average, 0.75);
    emit_report(merged, ReportFormat::Csv, dir / "r.csv");
    EXPECT_EQ(io::detail::read_file(dir / "r.csv"), "method,x,y,average\nm,50.00,100.00,75.00\n");
    EXPECT_THROW(emit_report(merged, ReportFormat::Csv, "/nonexistent/rehark/r.csv"), Error);
}
