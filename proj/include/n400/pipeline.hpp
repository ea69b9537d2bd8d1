#ifndef N400_PIPELINE_HPP
#define N400_PIPELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "n400/lmm.hpp"
#include "n400/stats.hpp"
#include "n400/table.hpp"
#include "n400/types.hpp"

namespace n400 {

// A nested-model ladder: a baseline fit followed by rungs that each add
// fixed-effect terms, compared by consecutive likelihood ratio tests.
struct LadderSpec {
    std::string name;
    std::string outcome = "amplitude";
    std::vector<std::string> baseline_terms = {"roi"};
    std::vector<std::vector<std::string>> additions;
    std::vector<std::string> random_intercepts = {"subject", "frame_id", "electrode"};

    // baseline -> +predictor -> +predictor:roi
    static LadderSpec for_predictor(const std::string& predictor);
};

struct LadderRung {
    std::string ladder;
    std::size_t rung = 0; // 0 = baseline
    std::string terms;
    std::size_t n_params = 0;
    std::size_t added_params = 0;
    double loglik = 0.0;
    double aic = 0.0;
    double aic_improvement = 0.0; // baseline AIC minus this rung's AIC
    bool converged = false;
    bool singular = false;
    std::vector<std::string> dropped_columns;
    std::optional<TestResult> lrt_vs_previous; // absent on the baseline rung
};

struct LadderReport {
    std::vector<LadderRung> rungs;
    FdrMethod fdr_method = FdrMethod::BY;
};

// All LRT p-values across ladders form one FDR family.
LadderReport run_ladders(const AnalysisTable& table,
                         const std::vector<LadderSpec>& ladders,
                         FdrMethod method = FdrMethod::BY);

LadderReport run_ladder(const AnalysisTable& table, const LadderSpec& ladder,
                        FdrMethod method = FdrMethod::BY);

// Exp-3 style variance partition: does `added` explain anything beyond
// `base`? Rungs: roi + base + base:roi, then +added, then +added:roi.
LadderReport variance_partition(const AnalysisTable& table, const std::string& base,
                                const std::string& added,
                                FdrMethod method = FdrMethod::BY);

struct HoldoutSpec {
    double fraction = 0.15;
    std::uint64_t seed = 1;
    bool stratify_by_condition = false;
    PredictionMode mode = PredictionMode::Conditional;
};

struct ConditionContrast {
    Condition first;
    Condition second;
    Alternative alternative; // on mean amplitude in microvolts
};

struct ContrastPlan {
    std::vector<ConditionContrast> condition_pairs;
    bool between_models = true;
    Alternative between_model_alternative = Alternative::TwoSided;
    std::vector<Roi> rois = {Roi::Central, Roi::Posterior};

    // The amplitude ordering best > related > unrelated > implausible (in
    // microvolts; the N400 grows more negative down the list), restricted to
    // the Central and Posterior ROIs.
    static ContrastPlan defaults();
};

struct ConditionSummary {
    std::string series; // "true" or a model name
    std::string condition;
    std::size_t n = 0;
    double mean = 0.0;
    double se = 0.0; // sample standard error over measurements
};

struct ContrastOutcome {
    std::string kind;  // "condition" or "between_model"
    std::string model; // model name, or condition for between-model rows
    std::string condition_a;
    std::string condition_b;
    TestResult test;
};

struct HoldoutReport {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> model_names;
    std::vector<ConditionSummary> condition_means;
    std::vector<ContrastOutcome> contrasts;
    FdrMethod fdr_method = FdrMethod::BY;
};

// Seeded measurement-level split, fit on the training part, conditional
// predictions on the held-out part, per-condition means and one-tailed
// contrasts over the plan's ROIs. All contrast p-values are one FDR family.
HoldoutReport holdout_eval(
    const AnalysisTable& table,
    const std::vector<std::pair<std::string, ModelSpec>>& models,
    const HoldoutSpec& holdout, const ContrastPlan& plan,
    FdrMethod method = FdrMethod::BY);

// Deterministic train/test membership for one seed; true = held out.
std::vector<bool> holdout_mask(const AnalysisTable& table, const HoldoutSpec& spec);

struct CorrelationEntry {
    std::string group; // "overall" or a condition label
    std::size_t n = 0;
    double r = 0.0;
};

struct CorrelationReport {
    std::string x_column;
    std::string y_column;
    std::vector<CorrelationEntry> entries;
    // one row per (frame, condition) after deduplication
    std::vector<std::tuple<std::string, std::string, double, double>> scatter;
};

// Predictor-similarity correlation over stimuli: measurements are first
// deduplicated to one row per (frame_id, condition) since predictors do not
// vary within a stimulus.
CorrelationReport corr_analysis(const AnalysisTable& table,
                                const std::string& predictor_column,
                                const std::string& similarity_column,
                                bool per_condition = true);

// Report bundle writers (CSV/markdown contracts used by the CLI).
void write_ladder_csv(const LadderReport& report, std::ostream& os);
void write_contrasts_csv(const HoldoutReport& report, std::ostream& os);
void write_conditions_csv(const HoldoutReport& report, std::ostream& os);
void write_correlation_csv(const CorrelationReport& report, std::ostream& os);
void write_scatter_csv(const CorrelationReport& report, std::ostream& os);

} // namespace n400

#endif
