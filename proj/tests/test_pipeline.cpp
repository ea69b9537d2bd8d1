#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "n400/pipeline.hpp"
#include "n400/synth.hpp"
#include "n400/util.hpp"

using namespace n400;

namespace {

// amplitude driven by surprisal_a; surprisal_b is a correlated bystander
SynthSpec planted_spec(std::uint64_t seed) {
    SynthSpec spec;
    spec.n_subjects = 6;
    spec.n_frames = 40;
    spec.n_electrodes = 6;
    spec.intercept = 1.0;
    spec.roi_offset = {0.2, 0.1, 0.0, -0.4, 0.3, 0.15};
    PredictorTruth a;
    a.name = "surprisal_a";
    a.condition_mean = {2.0, 3.0, 4.0, 5.0};
    a.sd = 1.0;
    a.slope = -0.6;
    PredictorTruth b;
    b.name = "surprisal_b";
    b.condition_mean = {2.5, 3.0, 3.5, 4.0};
    b.sd = 1.0;
    b.slope = 0.0;
    spec.predictors = {a, b};
    spec.correlations = {{0, 1, 0.7}};
    spec.subject_sd = 0.5;
    spec.frame_sd = 0.4;
    spec.electrode_sd = 0.1;
    spec.residual_sd = 1.0;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("run_ladder flags a planted predictor and prefers it on AIC") {
    const SynthResult r = generate(planted_spec(101));
    const LadderReport report = run_ladders(
        r.table,
        {LadderSpec::for_predictor("surprisal_a"),
         LadderSpec::for_predictor("surprisal_b")},
        FdrMethod::BY);

    REQUIRE(report.rungs.size() == 6);
    const LadderRung& a_main = report.rungs[1];
    CHECK(a_main.lrt_vs_previous.has_value());
    CHECK(a_main.lrt_vs_previous->df == doctest::Approx(1.0));
    CHECK(*a_main.lrt_vs_previous->p_adjusted < 0.001);
    CHECK(a_main.aic_improvement > 0.0);

    // the generating ladder fits better than the bystander's
    const LadderRung& a_top = report.rungs[2];
    const LadderRung& b_top = report.rungs[5];
    CHECK(a_top.aic < b_top.aic);

    // reported AIC difference is exactly 2*d_params - 2*d_loglik
    const LadderRung& base = report.rungs[0];
    CHECK(a_top.aic - base.aic ==
          doctest::Approx(2.0 * (static_cast<double>(a_top.n_params) -
                                 static_cast<double>(base.n_params)) -
                          2.0 * (a_top.loglik - base.loglik))
              .epsilon(1e-12));
}

TEST_CASE("run_ladder outputs are invariant to row order") {
    const SynthResult r = generate(planted_spec(7));
    const LadderSpec spec = LadderSpec::for_predictor("surprisal_a");
    const LadderReport base = run_ladder(r.table, spec, FdrMethod::BY);

    std::vector<std::size_t> perm(r.table.n_rows());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::mt19937_64 rng(99);
    std::shuffle(perm.begin(), perm.end(), rng);
    const LadderReport shuffled = run_ladder(r.table.subset(perm), spec, FdrMethod::BY);

    REQUIRE(base.rungs.size() == shuffled.rungs.size());
    for (std::size_t i = 0; i < base.rungs.size(); ++i) {
        CHECK(base.rungs[i].loglik ==
              doctest::Approx(shuffled.rungs[i].loglik).epsilon(1e-9));
        CHECK(base.rungs[i].aic == doctest::Approx(shuffled.rungs[i].aic).epsilon(1e-9));
        CHECK(base.rungs[i].n_params == shuffled.rungs[i].n_params);
    }
}

TEST_CASE("variance_partition: duplicated predictor is pruned and reported as zero") {
    const SynthResult r = generate(planted_spec(11));
    AnalysisTable t;
    for (const auto& col : r.table.columns()) {
        if (col.kind == AnalysisTable::ColumnKind::Numeric)
            t.add_numeric(col.name, col.values);
        else
            t.add_categorical(col.name, col.labels);
    }
    t.add_numeric("copy_a", r.table.numeric("surprisal_a"));

    const LadderReport report =
        variance_partition(t, "surprisal_a", "copy_a", FdrMethod::BY);
    REQUIRE(report.rungs.size() == 3);
    for (std::size_t i = 1; i < 3; ++i) {
        const LadderRung& rung = report.rungs[i];
        REQUIRE(rung.lrt_vs_previous.has_value());
        CHECK(rung.lrt_vs_previous->statistic == 0.0);
        CHECK(rung.lrt_vs_previous->df == 0.0);
        CHECK(rung.lrt_vs_previous->p_raw == 1.0);
        CHECK(rung.added_params == 0);
        CHECK_FALSE(rung.dropped_columns.empty());
    }
}

TEST_CASE("variance_partition detects a real second predictor") {
    SynthSpec spec = planted_spec(13);
    spec.predictors[1].slope = 0.5; // amplitude depends on both
    const SynthResult r = generate(spec);
    const LadderReport report =
        variance_partition(r.table, "surprisal_a", "surprisal_b", FdrMethod::BY);
    REQUIRE(report.rungs.size() == 3);
    CHECK(*report.rungs[1].lrt_vs_previous->p_adjusted < 0.01);
}

TEST_CASE("holdout_mask: deterministic, near the requested fraction") {
    const SynthResult r = generate(planted_spec(17));
    HoldoutSpec h;
    h.fraction = 0.15;
    h.seed = 23;
    const std::vector<bool> a = holdout_mask(r.table, h);
    const std::vector<bool> b = holdout_mask(r.table, h);
    CHECK(a == b);

    const auto n = static_cast<double>(r.table.n_rows());
    const double got = static_cast<double>(std::count(a.begin(), a.end(), true));
    CHECK(std::fabs(got - 0.15 * n) < 4.0 * std::sqrt(0.15 * 0.85 * n));

    h.seed = 24;
    CHECK(holdout_mask(r.table, h) != a);

    h.fraction = 0.0;
    CHECK_THROWS_AS(holdout_mask(r.table, h), ConfigError);
}

TEST_CASE("holdout_mask: stratified split takes the fraction per condition") {
    const SynthResult r = generate(planted_spec(19));
    HoldoutSpec h;
    h.fraction = 0.2;
    h.seed = 5;
    h.stratify_by_condition = true;
    const std::vector<bool> mask = holdout_mask(r.table, h);
    const auto& cond = r.table.categorical("condition");
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        counts[cond[i]].second += 1;
        if (mask[i]) counts[cond[i]].first += 1;
    }
    for (const auto& [label, c] : counts)
        CHECK(c.first ==
              static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(c.second))));
}

TEST_CASE("holdout_eval: zero-noise data predicts held-out rows exactly") {
    SynthSpec spec = planted_spec(29);
    spec.subject_sd = spec.frame_sd = spec.electrode_sd = spec.residual_sd = 0.0;
    const SynthResult r = generate(spec);

    ModelSpec model;
    model.fixed_terms = {"roi", "surprisal_a"};
    model.random_intercepts = {"subject", "frame_id", "electrode"};
    HoldoutSpec h;
    h.fraction = 0.15;
    h.seed = 3;
    const HoldoutReport report =
        holdout_eval(r.table, {{"a", model}}, h, ContrastPlan::defaults(), FdrMethod::BY);

    CHECK(report.n_train + report.n_test == r.table.n_rows());
    for (const ConditionSummary& s : report.condition_means) {
        if (s.series == "true") continue;
        for (const ConditionSummary& t : report.condition_means) {
            if (t.series == "true" && t.condition == s.condition) {
                CHECK(s.mean == doctest::Approx(t.mean).epsilon(1e-6));
                CHECK(s.n == t.n);
            }
        }
    }
}

TEST_CASE("holdout_eval: planted condition ordering is detected") {
    const SynthResult r = generate(planted_spec(31));
    ModelSpec model;
    model.fixed_terms = {"roi", "surprisal_a", "surprisal_a:roi"};
    model.random_intercepts = {"subject", "frame_id", "electrode"};
    HoldoutSpec h;
    h.fraction = 0.15;
    h.seed = 7;
    const HoldoutReport report =
        holdout_eval(r.table, {{"a", model}}, h, ContrastPlan::defaults(), FdrMethod::BY);

    // negative slope on increasing condition means: best > related > unrelated
    // > implausible in microvolts, all three one-tailed contrasts significant
    REQUIRE(report.contrasts.size() == 3);
    for (const ContrastOutcome& c : report.contrasts) {
        CHECK(c.kind == "condition");
        CHECK(c.test.statistic > 0.0);
        CHECK(*c.test.p_adjusted < 0.01);
    }
}

TEST_CASE("holdout_eval: the planted ordering holds across 20 different seeds") {
    SynthSpec strong = planted_spec(53);
    strong.n_subjects = 8;
    strong.n_frames = 50;
    strong.predictors[0].condition_mean = {2.0, 4.0, 6.0, 8.0};
    strong.predictors[0].slope = -1.0;
    const SynthResult r = generate(strong);
    ModelSpec model;
    model.fixed_terms = {"roi", "surprisal_a", "surprisal_a:roi"};
    model.random_intercepts = {"subject", "frame_id", "electrode"};
    std::vector<std::vector<bool>> memberships;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        HoldoutSpec h;
        h.fraction = 0.15;
        h.seed = seed;
        memberships.push_back(holdout_mask(r.table, h));
        const HoldoutReport report = holdout_eval(r.table, {{"a", model}}, h,
                                                  ContrastPlan::defaults(), FdrMethod::BY);
        for (const ContrastOutcome& c : report.contrasts) {
            CAPTURE(seed);
            CHECK(c.test.statistic > 0.0);
            CHECK(*c.test.p_adjusted < 0.01);
        }
    }
    // seeds actually change the membership
    CHECK(memberships[0] != memberships[1]);
}

TEST_CASE("holdout_eval: between-model contrasts cover every condition") {
    const SynthResult r = generate(planted_spec(37));
    ModelSpec ma;
    ma.fixed_terms = {"roi", "surprisal_a"};
    ma.random_intercepts = {"subject", "frame_id", "electrode"};
    ModelSpec mb = ma;
    mb.fixed_terms = {"roi", "surprisal_b"};
    HoldoutSpec h;
    h.fraction = 0.2;
    h.seed = 11;
    const HoldoutReport report = holdout_eval(r.table, {{"a", ma}, {"b", mb}}, h,
                                              ContrastPlan::defaults(), FdrMethod::BY);
    std::size_t between = 0;
    for (const ContrastOutcome& c : report.contrasts)
        if (c.kind == "between_model") ++between;
    CHECK(between == 4);                       // one per condition
    CHECK(report.contrasts.size() == 3 * 2 + 4); // condition pairs per model + between

    // same seed reruns identically
    const HoldoutReport again = holdout_eval(r.table, {{"a", ma}, {"b", mb}}, h,
                                             ContrastPlan::defaults(), FdrMethod::BY);
    REQUIRE(again.contrasts.size() == report.contrasts.size());
    for (std::size_t i = 0; i < report.contrasts.size(); ++i)
        CHECK(again.contrasts[i].test.statistic == report.contrasts[i].test.statistic);
}

TEST_CASE("corr_analysis: perfect dependence and deduplication") {
    const SynthResult r = generate(planted_spec(41));

    AnalysisTable t;
    for (const auto& col : r.table.columns()) {
        if (col.kind == AnalysisTable::ColumnKind::Numeric)
            t.add_numeric(col.name, col.values);
        else
            t.add_categorical(col.name, col.labels);
    }
    std::vector<double> affine;
    for (double v : r.table.numeric("surprisal_a")) affine.push_back(-2.0 * v + 3.0);
    t.add_numeric("affine_a", std::move(affine));

    const CorrelationReport perfect = corr_analysis(t, "surprisal_a", "affine_a");
    CHECK(perfect.entries[0].group == "overall");
    CHECK(perfect.entries[0].r == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(perfect.entries[0].n == 40 * 4);

    // duplicating every measurement row must not move r
    const CorrelationReport base = corr_analysis(t, "surprisal_a", "surprisal_b");
    std::vector<std::size_t> doubled;
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
        doubled.push_back(i);
        doubled.push_back(i);
    }
    const CorrelationReport dup =
        corr_analysis(t.subset(doubled), "surprisal_a", "surprisal_b");
    CHECK(dup.entries[0].r == doctest::Approx(base.entries[0].r).epsilon(1e-12));
    CHECK(dup.entries[0].n == base.entries[0].n);

    // per-condition entries follow the overall one
    bool saw_condition = false;
    for (const CorrelationEntry& e : base.entries)
        if (e.group == "best") saw_condition = true;
    CHECK(saw_condition);
}

TEST_CASE("corr_analysis requires 3 unique stimuli") {
    AnalysisTable t;
    t.add_categorical("frame_id", {"F1", "F1", "F2"});
    t.add_categorical("condition", {"best", "best", "best"});
    t.add_numeric("x", {1.0, 1.0, 2.0});
    t.add_numeric("y", {0.5, 0.5, 0.1});
    CHECK_THROWS_AS(corr_analysis(t, "x", "y"), NumericError);
}

TEST_CASE("report writers emit the documented headers") {
    const SynthResult r = generate(planted_spec(43));
    const LadderReport ladder =
        run_ladder(r.table, LadderSpec::for_predictor("surprisal_a"), FdrMethod::BY);
    std::ostringstream lcsv;
    write_ladder_csv(ladder, lcsv);
    CHECK(lcsv.str().rfind("ladder,rung,terms,n_params,loglik,aic", 0) == 0);
    CHECK(lcsv.str().find(",by,") != std::string::npos);

    const CorrelationReport corr = corr_analysis(r.table, "surprisal_a", "surprisal_b");
    std::ostringstream ccsv, scsv;
    write_correlation_csv(corr, ccsv);
    write_scatter_csv(corr, scsv);
    CHECK(ccsv.str().rfind("x,y,group,n,r", 0) == 0);
    CHECK(scsv.str().rfind("frame_id,condition,surprisal_a,surprisal_b", 0) == 0);
}
