#include "n400/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "n400/metrics.hpp"
#include "n400/util.hpp"

namespace n400 {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out += (i ? sep : "") + parts[i];
    return out;
}

} // namespace

LadderSpec LadderSpec::for_predictor(const std::string& predictor) {
    LadderSpec spec;
    spec.name = predictor;
    spec.additions = {{predictor}, {predictor + ":roi"}};
    return spec;
}

LadderReport run_ladders(const AnalysisTable& table,
                         const std::vector<LadderSpec>& ladders, FdrMethod method) {
    LadderReport report;
    report.fdr_method = method;

    for (const LadderSpec& ladder : ladders) {
        std::vector<std::string> terms = ladder.baseline_terms;
        std::optional<FittedModel> previous;
        double baseline_aic = 0.0;

        for (std::size_t rung = 0; rung <= ladder.additions.size(); ++rung) {
            if (rung > 0)
                for (const std::string& t : ladder.additions[rung - 1])
                    terms.push_back(t);

            ModelSpec spec;
            spec.outcome = ladder.outcome;
            spec.fixed_terms = terms;
            spec.random_intercepts = ladder.random_intercepts;
            FittedModel fit = fit_ml(table, spec, RankPolicy::Prune);

            LadderRung r;
            r.ladder = ladder.name;
            r.rung = rung;
            r.terms = join(terms, " + ");
            r.n_params = fit.n_params;
            r.loglik = fit.loglik;
            r.aic = fit.aic();
            r.converged = fit.converged;
            r.singular = fit.singular;
            r.dropped_columns = fit.dropped_columns;
            if (rung == 0) {
                baseline_aic = r.aic;
            } else {
                // order-biased pruning keeps the previous rung's columns, so
                // the pair is nested by construction; audit the counts anyway
                if (fit.p < previous->p)
                    throw NumericError("ladder '" + ladder.name +
                                       "': rung lost parameters, fits are not nested");
                r.added_params = fit.p - previous->p;
                if (r.added_params == 0) {
                    // everything the rung added was collinear; no test to run
                    TestResult t;
                    t.label = ladder.name + ":rung" + std::to_string(rung);
                    t.statistic = 0.0;
                    t.df = 0.0;
                    t.p_raw = 1.0;
                    t.alternative = Alternative::Greater;
                    r.lrt_vs_previous = t;
                } else {
                    r.lrt_vs_previous =
                        lrt(*previous, fit,
                            ladder.name + ":rung" + std::to_string(rung));
                }
            }
            r.aic_improvement = baseline_aic - r.aic;
            report.rungs.push_back(std::move(r));
            previous = std::move(fit);
        }
    }

    // one FDR family across every LRT in the report
    std::vector<double> ps;
    for (const LadderRung& r : report.rungs)
        if (r.lrt_vs_previous) ps.push_back(r.lrt_vs_previous->p_raw);
    const std::vector<double> adjusted = fdr_adjust(ps, method);
    std::size_t i = 0;
    for (LadderRung& r : report.rungs)
        if (r.lrt_vs_previous) r.lrt_vs_previous->p_adjusted = adjusted[i++];
    return report;
}

LadderReport run_ladder(const AnalysisTable& table, const LadderSpec& ladder,
                        FdrMethod method) {
    return run_ladders(table, {ladder}, method);
}

LadderReport variance_partition(const AnalysisTable& table, const std::string& base,
                                const std::string& added, FdrMethod method) {
    LadderSpec spec;
    spec.name = added + "_over_" + base;
    spec.baseline_terms = {"roi", base, base + ":roi"};
    spec.additions = {{added}, {added + ":roi"}};
    return run_ladder(table, spec, method);
}

ContrastPlan ContrastPlan::defaults() {
    ContrastPlan plan;
    plan.condition_pairs = {
        {Condition::BestCompletion, Condition::Related, Alternative::Greater},
        {Condition::Related, Condition::Unrelated, Alternative::Greater},
        {Condition::Unrelated, Condition::Implausible, Alternative::Greater},
    };
    return plan;
}

std::vector<bool> holdout_mask(const AnalysisTable& table, const HoldoutSpec& spec) {
    if (!(spec.fraction > 0.0 && spec.fraction < 1.0))
        throw ConfigError("holdout fraction must be strictly between 0 and 1");
    const std::size_t n = table.n_rows();
    std::vector<bool> mask(n, false);
    std::mt19937_64 rng(spec.seed);

    if (!spec.stratify_by_condition) {
        std::bernoulli_distribution pick(spec.fraction);
        for (std::size_t r = 0; r < n; ++r) mask[r] = pick(rng);
        return mask;
    }

    const auto& cond = table.categorical("condition");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < n; ++r) groups[cond[r]].push_back(r);
    for (auto& [label, rows] : groups) {
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto take = static_cast<std::size_t>(
            std::floor(spec.fraction * static_cast<double>(rows.size())));
        for (std::size_t i = 0; i < take; ++i) mask[rows[i]] = true;
    }
    return mask;
}

HoldoutReport holdout_eval(
    const AnalysisTable& table,
    const std::vector<std::pair<std::string, ModelSpec>>& models,
    const HoldoutSpec& holdout, const ContrastPlan& plan, FdrMethod method) {
    if (models.empty()) throw ConfigError("holdout_eval: no models given");
    for (const ConditionContrast& cc : plan.condition_pairs)
        if (cc.first == cc.second)
            throw ConfigError("holdout_eval: contrast pairs a condition with itself");
    if (plan.rois.empty()) throw ConfigError("holdout_eval: empty ROI restriction");

    const std::vector<bool> mask = holdout_mask(table, holdout);
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        (mask[r] ? test_rows : train_rows).push_back(r);
    if (train_rows.empty() || test_rows.empty())
        throw NumericError("holdout_eval: degenerate split");

    const AnalysisTable train = table.subset(train_rows);
    const AnalysisTable test = table.subset(test_rows);

    HoldoutReport report;
    report.n_train = train_rows.size();
    report.n_test = test_rows.size();
    report.fraction = holdout.fraction;
    report.seed = holdout.seed;
    report.fdr_method = method;

    // held-out rows inside the plan's ROIs
    std::set<std::string> roi_labels;
    for (Roi r : plan.rois) roi_labels.insert(to_string(r));
    const auto& test_roi = test.categorical("roi");
    const auto& test_cond = test.categorical("condition");
    const auto& test_amp = test.numeric("amplitude");
    std::vector<std::size_t> plan_rows;
    for (std::size_t r = 0; r < test.n_rows(); ++r)
        if (roi_labels.count(test_roi[r])) plan_rows.push_back(r);
    if (plan_rows.empty())
        throw NumericError("holdout_eval: no held-out rows in the plan ROIs");

    // series of values per condition: "true" plus one per model
    std::map<std::string, std::map<std::string, std::vector<double>>> series;
    for (std::size_t r : plan_rows)
        series["true"][test_cond[r]].push_back(test_amp[r]);

    for (const auto& [name, spec] : models) {
        const FittedModel fit = fit_ml(train, spec, RankPolicy::Prune);
        const Eigen::VectorXd pred = predict(fit, test, holdout.mode);
        report.model_names.push_back(name);
        for (std::size_t r : plan_rows)
            series[name][test_cond[r]].push_back(
                pred[static_cast<Eigen::Index>(r)]);
    }

    for (Condition c : kConditions) {
        const std::string label = to_string(c);
        for (const auto& [name, by_cond] : series) {
            auto it = by_cond.find(label);
            if (it == by_cond.end() || it->second.empty())
                throw NumericError("holdout_eval: held-out set has no '" + label +
                                   "' rows in the plan ROIs");
            ConditionSummary s;
            s.series = name;
            s.condition = label;
            s.n = it->second.size();
            if (s.n >= 2) {
                const MeanSd ms = mean_sd(it->second);
                s.mean = ms.mean;
                s.se = ms.sd / std::sqrt(static_cast<double>(s.n));
            } else {
                s.mean = it->second.front();
                s.se = 0.0;
            }
            report.condition_means.push_back(std::move(s));
        }
    }

    // within-model condition contrasts
    for (const auto& name : report.model_names) {
        for (const ConditionContrast& cc : plan.condition_pairs) {
            const std::string a = to_string(cc.first);
            const std::string b = to_string(cc.second);
            ContrastOutcome out;
            out.kind = "condition";
            out.model = name;
            out.condition_a = a;
            out.condition_b = b;
            out.test = welch_t(series.at(name).at(a), series.at(name).at(b),
                               cc.alternative, name + ":" + a + ">" + b);
            report.contrasts.push_back(std::move(out));
        }
    }

    // between-model contrasts, same condition
    if (plan.between_models && report.model_names.size() >= 2) {
        for (std::size_t i = 0; i < report.model_names.size(); ++i) {
            for (std::size_t j = i + 1; j < report.model_names.size(); ++j) {
                for (Condition c : kConditions) {
                    const std::string label = to_string(c);
                    ContrastOutcome out;
                    out.kind = "between_model";
                    out.model = label;
                    out.condition_a = report.model_names[i];
                    out.condition_b = report.model_names[j];
                    out.test = welch_t(series.at(report.model_names[i]).at(label),
                                       series.at(report.model_names[j]).at(label),
                                       plan.between_model_alternative,
                                       label + ":" + report.model_names[i] + " vs " +
                                           report.model_names[j]);
                    report.contrasts.push_back(std::move(out));
                }
            }
        }
    }

    std::vector<double> ps;
    for (const ContrastOutcome& c : report.contrasts) ps.push_back(c.test.p_raw);
    const std::vector<double> adjusted = fdr_adjust(ps, method);
    for (std::size_t i = 0; i < report.contrasts.size(); ++i)
        report.contrasts[i].test.p_adjusted = adjusted[i];
    return report;
}

CorrelationReport corr_analysis(const AnalysisTable& table,
                                const std::string& predictor_column,
                                const std::string& similarity_column,
                                bool per_condition) {
    const auto& frames = table.categorical("frame_id");
    const auto& conds = table.categorical("condition");
    const auto& xs = table.numeric(predictor_column);
    const auto& ys = table.numeric(similarity_column);

    // one row per stimulus; predictors are constant within (frame, condition)
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> dedup;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        dedup.try_emplace({frames[r], conds[r]}, xs[r], ys[r]);
    if (dedup.size() < 3)
        throw NumericError("corr_analysis: fewer than 3 unique stimulus rows");

    CorrelationReport report;
    report.x_column = predictor_column;
    report.y_column = similarity_column;

    std::vector<double> all_x, all_y;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_cond;
    for (const auto& [key, xy] : dedup) {
        report.scatter.emplace_back(key.first, key.second, xy.first, xy.second);
        all_x.push_back(xy.first);
        all_y.push_back(xy.second);
        by_cond[key.second].first.push_back(xy.first);
        by_cond[key.second].second.push_back(xy.second);
    }

    report.entries.push_back(
        CorrelationEntry{"overall", all_x.size(), pearson_r(all_x, all_y)});
    if (per_condition) {
        for (const auto& [label, xy] : by_cond) {
            if (xy.first.size() < 3) continue;
            report.entries.push_back(
                CorrelationEntry{label, xy.first.size(), pearson_r(xy.first, xy.second)});
        }
    }
    return report;
}

void write_ladder_csv(const LadderReport& report, std::ostream& os) {
    os << "ladder,rung,terms,n_params,loglik,aic,aic_improvement,converged,"
          "singular,added_params,lrt_stat,lrt_df,p_raw,p_adjusted,fdr_method,"
          "dropped_columns\n";
    for (const LadderRung& r : report.rungs) {
        os << r.ladder << "," << r.rung << "," << r.terms << "," << r.n_params << ","
           << format_g9(r.loglik) << "," << format_g9(r.aic) << ","
           << format_g9(r.aic_improvement) << "," << (r.converged ? "yes" : "no")
           << "," << (r.singular ? "yes" : "no") << "," << r.added_params << ",";
        if (r.lrt_vs_previous) {
            const TestResult& t = *r.lrt_vs_previous;
            os << format_g9(t.statistic) << "," << format_g9(t.df) << ","
               << format_g9(t.p_raw) << ","
               << (t.p_adjusted ? format_g9(*t.p_adjusted) : std::string());
        } else {
            os << ",,,";
        }
        os << "," << to_string(report.fdr_method) << ","
           << join(r.dropped_columns, ";") << "\n";
    }
}

void write_contrasts_csv(const HoldoutReport& report, std::ostream& os) {
    os << "kind,model,a,b,alternative,statistic,df,p_raw,p_adjusted,fdr_method\n";
    for (const ContrastOutcome& c : report.contrasts) {
        os << c.kind << "," << c.model << "," << c.condition_a << "," << c.condition_b
           << "," << to_string(c.test.alternative) << ","
           << format_g9(c.test.statistic) << "," << format_g9(c.test.df) << ","
           << format_g9(c.test.p_raw) << ","
           << (c.test.p_adjusted ? format_g9(*c.test.p_adjusted) : std::string())
           << "," << to_string(report.fdr_method) << "\n";
    }
}

void write_conditions_csv(const HoldoutReport& report, std::ostream& os) {
    os << "series,condition,n,mean,se\n";
    for (const ConditionSummary& s : report.condition_means)
        os << s.series << "," << s.condition << "," << s.n << "," << format_g9(s.mean)
           << "," << format_g9(s.se) << "\n";
}

void write_correlation_csv(const CorrelationReport& report, std::ostream& os) {
    os << "x,y,group,n,r\n";
    for (const CorrelationEntry& e : report.entries)
        os << report.x_column << "," << report.y_column << "," << e.group << ","
           << e.n << "," << format_g9(e.r) << "\n";
}

void write_scatter_csv(const CorrelationReport& report, std::ostream& os) {
    os << "frame_id,condition," << report.x_column << "," << report.y_column << "\n";
    for (const auto& [frame, cond, x, y] : report.scatter)
        os << frame << "," << cond << "," << format_g9(x) << "," << format_g9(y)
           << "\n";
}

} // namespace n400
