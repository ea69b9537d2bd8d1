// n400kit: surprisal / similarity predictors, mixed-effects model comparison
// and held-out evaluation for single-trial ERP amplitude tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "n400/ingest.hpp"
#include "n400/lmm.hpp"
#include "n400/metrics.hpp"
#include "n400/pipeline.hpp"
#include "n400/stats.hpp"
#include "n400/svg.hpp"
#include "n400/synth.hpp"
#include "n400/table.hpp"
#include "n400/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw n400::InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hash_hex(const std::string& content) {
    char buf[26];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(n400::fnv1a64(content)));
    return buf;
}

// Accumulates input/output hashes and decided defaults, then lands as
// manifest.json so a run can be reproduced bit for bit.
class RunManifest {
public:
    RunManifest(std::string command, const fs::path& out_dir)
        : out_dir_(out_dir) {
        doc_["tool"] = n400::version_string();
        doc_["command"] = std::move(command);
        doc_["defaults"] = {{"window_ms", {300.0, 500.0}},
                            {"holdout_fraction", 0.15},
                            {"fdr", "by"},
                            {"log_base", "e"},
                            {"prediction_mode", "conditional"},
                            {"split", "measurement-level"},
                            {"treatment_coding_reference", "alphabetically first"}};
    }

    void note_input(const fs::path& path, const std::string& content) {
        doc_["inputs"][path.string()] = hash_hex(content);
    }

    void set_option(const std::string& key, json value) {
        doc_["options"][key] = std::move(value);
    }

    void write_output(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir_);
        const fs::path path = out_dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw n400::InputError("cannot write " + path.string());
        out << content;
        doc_["outputs"][name] = hash_hex(content);
    }

    void finalize() {
        fs::create_directories(out_dir_);
        std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
        if (!out)
            throw n400::InputError("cannot write " +
                                   (out_dir_ / "manifest.json").string());
        out << doc_.dump(2) << "\n";
    }

private:
    fs::path out_dir_;
    json doc_;
};

struct TableSource {
    std::string table_path;
    std::string stimuli_path;
    std::vector<std::string> lm_paths;
    std::string eeg_path;
    std::string epochs_path;
    std::vector<double> window{300.0, 500.0};
    double base = 0.0; // 0 = natural log

    void add_options(CLI::App* cmd, bool allow_table = true) {
        if (allow_table)
            cmd->add_option("--table", table_path,
                            "analysis table csv produced by 'metrics' or 'synth'");
        cmd->add_option("--stimuli", stimuli_path, "stimuli.tsv");
        cmd->add_option("--lm", lm_paths, "lm_output.jsonl (repeatable, one per model)");
        cmd->add_option("--eeg", eeg_path, "eeg.csv with window-mean amplitudes");
        cmd->add_option("--epochs", epochs_path, "epochs.csv with per-sample rows");
        cmd->add_option("--window", window, "epoch window start/end in ms")
            ->expected(2);
        cmd->add_option("--base", base, "surprisal log base (default: natural log)");
    }
};

n400::AnalysisTable build_table_from_files(const TableSource& src,
                                           RunManifest& manifest) {
    if (src.stimuli_path.empty() || src.lm_paths.empty() ||
        (src.eeg_path.empty() && src.epochs_path.empty()))
        throw n400::ConfigError(
            "need either --table or all of --stimuli, --lm and --eeg/--epochs");

    const std::string stim_text = read_file(src.stimuli_path);
    manifest.note_input(src.stimuli_path, stim_text);
    std::istringstream stim_in(stim_text);
    const auto stimuli = n400::parse_stimuli(stim_in);

    std::vector<n400::LMSentenceRecord> records;
    for (const std::string& path : src.lm_paths) {
        const std::string text = read_file(path);
        manifest.note_input(path, text);
        std::istringstream in(text);
        for (auto& r : n400::parse_lm_output(in)) records.push_back(std::move(r));
    }

    std::vector<n400::TrialMeasurement> trials;
    if (!src.eeg_path.empty()) {
        const std::string text = read_file(src.eeg_path);
        manifest.note_input(src.eeg_path, text);
        std::istringstream in(text);
        trials = n400::parse_eeg(in);
    } else {
        const std::string text = read_file(src.epochs_path);
        manifest.note_input(src.epochs_path, text);
        std::istringstream in(text);
        trials = n400::reduce_epochs(n400::parse_epochs(in), src.window[0],
                                     src.window[1]);
    }

    // one surprisal and one similarity column per model found in the lm files
    std::vector<n400::PredictorRecipe> recipes;
    std::map<std::string, bool> models;
    for (const auto& r : records) models[r.model_id] = true;
    for (const auto& [model, unused] : models) {
        recipes.push_back(n400::PredictorRecipe::surprisal(model));
        recipes.push_back(n400::PredictorRecipe::cosine_similarity(model));
    }
    bool all_cloze = !stimuli.empty();
    for (const auto& s : stimuli)
        if (!s.cloze) all_cloze = false;
    if (all_cloze) recipes.push_back(n400::PredictorRecipe::cloze());

    return n400::build_analysis_table(stimuli, records, trials, recipes, src.base);
}

n400::AnalysisTable load_table(const TableSource& src, RunManifest& manifest) {
    if (!src.table_path.empty()) {
        const std::string text = read_file(src.table_path);
        manifest.note_input(src.table_path, text);
        std::istringstream in(text);
        return n400::AnalysisTable::read_csv(in);
    }
    return build_table_from_files(src, manifest);
}

n400::ModelSpec predictor_model(const std::vector<std::string>& predictors,
                                bool interactions) {
    n400::ModelSpec spec;
    spec.fixed_terms = {"roi"};
    for (const std::string& p : predictors) {
        spec.fixed_terms.push_back(p);
        if (interactions) spec.fixed_terms.push_back(p + ":roi");
    }
    spec.random_intercepts = {"subject", "frame_id", "electrode"};
    return spec;
}

std::string condition_summaries(const n400::AnalysisTable& table) {
    std::ostringstream os;
    const auto& cond = table.categorical("condition");
    for (const auto& col : table.columns()) {
        if (col.kind != n400::AnalysisTable::ColumnKind::Numeric ||
            col.name == "amplitude")
            continue;
        os << col.name << ":\n";
        for (n400::Condition c : n400::kConditions) {
            const std::string label = n400::to_string(c);
            std::vector<double> values;
            for (std::size_t r = 0; r < table.n_rows(); ++r)
                if (cond[r] == label) values.push_back(col.values[r]);
            if (values.size() < 2) continue;
            const n400::MeanSd ms = n400::mean_sd(values);
            os << "  " << label << ": " << n400::format_g9(ms.mean) << " +- "
               << n400::format_g9(ms.sd) << " (n=" << values.size() << ")\n";
        }
    }
    return os.str();
}

std::string ladder_summary_md(const n400::LadderReport& report) {
    std::ostringstream os;
    os << "# Model comparison\n\n";
    os << "FDR method: " << n400::to_string(report.fdr_method)
       << " (family: all LRTs in this run)\n\n";
    os << "| ladder | rung | n_params | loglik | AIC | dAIC | LRT stat | df | p "
          "| p_adj | singular |\n";
    os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : report.rungs) {
        os << "| " << r.ladder << " | " << r.rung << " | " << r.n_params << " | "
           << n400::format_g9(r.loglik) << " | " << n400::format_g9(r.aic) << " | "
           << n400::format_g9(r.aic_improvement) << " | ";
        if (r.lrt_vs_previous) {
            os << n400::format_g9(r.lrt_vs_previous->statistic) << " | "
               << n400::format_g9(r.lrt_vs_previous->df) << " | "
               << n400::format_g9(r.lrt_vs_previous->p_raw) << " | "
               << n400::format_g9(r.lrt_vs_previous->p_adjusted.value_or(1.0));
        } else {
            os << "| | |";
        }
        os << " | " << (r.singular ? "yes" : "no") << " |\n";
    }
    return os.str();
}

std::string holdout_summary_md(const n400::HoldoutReport& report) {
    std::ostringstream os;
    os << "# Held-out evaluation\n\n";
    os << "Split: measurement-level, fraction " << n400::format_g9(report.fraction)
       << ", seed " << report.seed << "; " << report.n_train << " train / "
       << report.n_test << " test rows.\n";
    os << "FDR method: " << n400::to_string(report.fdr_method)
       << " (family: all contrasts in this run)\n\n";
    os << "| series | condition | n | mean | se |\n|---|---|---|---|---|\n";
    for (const auto& s : report.condition_means)
        os << "| " << s.series << " | " << s.condition << " | " << s.n << " | "
           << n400::format_g9(s.mean) << " | " << n400::format_g9(s.se) << " |\n";
    os << "\n| kind | model | a | b | t | df | p | p_adj |\n|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : report.contrasts)
        os << "| " << c.kind << " | " << c.model << " | " << c.condition_a << " | "
           << c.condition_b << " | " << n400::format_g9(c.test.statistic) << " | "
           << n400::format_g9(c.test.df) << " | " << n400::format_g9(c.test.p_raw)
           << " | " << n400::format_g9(c.test.p_adjusted.value_or(1.0)) << " |\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// subcommand payloads

struct MetricsArgs {
    TableSource source;
    std::string out = "out";
};

int run_metrics(const MetricsArgs& args) {
    RunManifest manifest("metrics", args.out);
    manifest.set_option("log_base", args.source.base == 0.0
                                        ? json("e")
                                        : json(args.source.base));
    manifest.set_option("window_ms", args.source.window);
    const n400::AnalysisTable table = build_table_from_files(args.source, manifest);

    std::ostringstream csv;
    table.write_csv(csv);
    manifest.write_output("table.csv", csv.str());
    manifest.finalize();

    std::cout << "wrote " << (fs::path(args.out) / "table.csv").string() << " ("
              << table.n_rows() << " rows)\n"
              << condition_summaries(table);
    return 0;
}

struct FitArgs {
    TableSource source;
    std::vector<std::string> predictors;
    bool no_interactions = false;
    std::string out = "out";
};

int run_fit(const FitArgs& args) {
    RunManifest manifest("fit", args.out);
    const n400::AnalysisTable table = load_table(args.source, manifest);
    const n400::ModelSpec spec =
        predictor_model(args.predictors, !args.no_interactions);
    manifest.set_option("formula", spec.formula());

    const n400::FittedModel fit = n400::fit_ml(table, spec, n400::RankPolicy::Prune);
    std::ostringstream summary;
    n400::write_summary(fit, summary);
    manifest.write_output("model_summary.txt", summary.str());
    manifest.finalize();
    std::cout << summary.str();
    return 0;
}

struct CompareArgs {
    TableSource source;
    std::vector<std::string> predictors;
    std::vector<std::string> ladders;
    std::string fdr = "by";
    std::string out = "out";
};

// "--ladder base1+base2|add1|add2+add3": '|' separates the baseline group
// from the rungs, '+' separates terms within a group.
n400::LadderSpec parse_ladder(const std::string& definition) {
    n400::LadderSpec spec;
    spec.name = definition;
    const std::vector<std::string> groups = n400::split(definition, '|');
    if (groups.size() < 2)
        throw n400::ConfigError("--ladder needs a baseline and at least one rung: '" +
                                definition + "'");
    auto terms_of = [](const std::string& group) {
        std::vector<std::string> terms;
        for (const std::string& t : n400::split(group, '+'))
            if (!n400::trim(t).empty()) terms.push_back(n400::trim(t));
        return terms;
    };
    spec.baseline_terms = terms_of(groups[0]);
    for (std::size_t i = 1; i < groups.size(); ++i) {
        std::vector<std::string> rung = terms_of(groups[i]);
        if (rung.empty())
            throw n400::ConfigError("--ladder has an empty rung: '" + definition + "'");
        spec.additions.push_back(std::move(rung));
    }
    return spec;
}

int run_compare(const CompareArgs& args) {
    if (args.predictors.empty() && args.ladders.empty())
        throw n400::ConfigError("compare: need at least one --predictor or --ladder");
    RunManifest manifest("compare", args.out);
    const n400::AnalysisTable table = load_table(args.source, manifest);
    const n400::FdrMethod fdr = n400::fdr_method_from_string(args.fdr);
    manifest.set_option("fdr", n400::to_string(fdr));
    manifest.set_option("predictors", args.predictors);
    manifest.set_option("ladders", args.ladders);

    std::vector<n400::LadderSpec> ladders;
    for (const std::string& p : args.predictors)
        ladders.push_back(n400::LadderSpec::for_predictor(p));
    for (const std::string& l : args.ladders) ladders.push_back(parse_ladder(l));
    const n400::LadderReport report = n400::run_ladders(table, ladders, fdr);

    std::ostringstream csv;
    n400::write_ladder_csv(report, csv);
    manifest.write_output("ladder.csv", csv.str());
    manifest.write_output("summary.md", ladder_summary_md(report));
    manifest.finalize();
    std::cout << ladder_summary_md(report);
    return 0;
}

struct HoldoutArgs {
    TableSource source;
    std::vector<std::string> predictors;
    double fraction = 0.15;
    std::uint64_t seed = 1;
    bool stratify = false;
    std::string fdr = "by";
    std::string out = "out";
};

int run_holdout(const HoldoutArgs& args) {
    if (args.predictors.empty())
        throw n400::ConfigError("holdout: need at least one --predictor");
    RunManifest manifest("holdout", args.out);
    const n400::AnalysisTable table = load_table(args.source, manifest);
    const n400::FdrMethod fdr = n400::fdr_method_from_string(args.fdr);
    manifest.set_option("fdr", n400::to_string(fdr));
    manifest.set_option("holdout_fraction", args.fraction);
    manifest.set_option("seed", args.seed);
    manifest.set_option("stratify_by_condition", args.stratify);
    manifest.set_option("predictors", args.predictors);

    std::vector<std::pair<std::string, n400::ModelSpec>> models;
    for (const std::string& p : args.predictors)
        models.emplace_back(p, predictor_model({p}, true));

    n400::HoldoutSpec holdout;
    holdout.fraction = args.fraction;
    holdout.seed = args.seed;
    holdout.stratify_by_condition = args.stratify;
    const n400::HoldoutReport report = n400::holdout_eval(
        table, models, holdout, n400::ContrastPlan::defaults(), fdr);

    std::ostringstream contrasts, conditions;
    n400::write_contrasts_csv(report, contrasts);
    n400::write_conditions_csv(report, conditions);
    manifest.write_output("contrasts.csv", contrasts.str());
    manifest.write_output("conditions.csv", conditions.str());
    manifest.write_output("summary.md", holdout_summary_md(report));
    manifest.finalize();
    std::cout << holdout_summary_md(report);
    return 0;
}

struct CorrArgs {
    TableSource source;
    std::vector<std::string> predictors;
    std::vector<std::string> similarities;
    std::string out = "out";
};

int run_corr(const CorrArgs& args) {
    if (args.predictors.empty())
        throw n400::ConfigError("corr: need at least one --predictor");
    RunManifest manifest("corr", args.out);
    const n400::AnalysisTable table = load_table(args.source, manifest);
    manifest.set_option("predictors", args.predictors);

    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < args.predictors.size(); ++i) {
        std::string y;
        if (i < args.similarities.size()) {
            y = args.similarities[i];
        } else if (args.predictors[i].rfind("surprisal_", 0) == 0) {
            y = "cossim_" + args.predictors[i].substr(10);
        } else {
            throw n400::ConfigError("corr: no --similarity given for '" +
                                    args.predictors[i] + "'");
        }
        pairs.emplace_back(args.predictors[i], y);
    }

    std::ostringstream all_csv;
    bool header_done = false;
    std::ostringstream digest;
    digest << "# Predictor-similarity correlation\n\n";
    for (const auto& [x, y] : pairs) {
        const n400::CorrelationReport report = n400::corr_analysis(table, x, y);
        std::ostringstream one;
        n400::write_correlation_csv(report, one);
        const std::string text = one.str();
        all_csv << (header_done ? text.substr(text.find('\n') + 1) : text);
        header_done = true;

        std::ostringstream scatter;
        n400::write_scatter_csv(report, scatter);
        manifest.write_output("scatter_" + x + ".csv", scatter.str());
        for (const auto& e : report.entries)
            digest << "- " << x << " vs " << y << " [" << e.group
                   << "]: r = " << n400::format_g9(e.r) << " (n = " << e.n << ")\n";
    }
    manifest.write_output("correlation.csv", all_csv.str());
    manifest.write_output("summary.md", digest.str());
    manifest.finalize();
    std::cout << digest.str();
    return 0;
}

struct SynthArgs {
    std::size_t subjects = 10;
    std::size_t frames = 50;
    std::size_t electrodes = 8;
    double rho_a = -0.48;
    double rho_b = -0.20;
    double slope_a = -0.6;
    double slope_b = 0.0;
    double residual_sd = 1.0;
    std::uint64_t seed = 1;
    std::string out = "out";
};

// Two synthetic "models" a and b, each contributing a surprisal/similarity
// pair; amplitude is driven by surprisal_a (plus ROI structure).
n400::SynthSpec synth_spec_from(const SynthArgs& args) {
    n400::SynthSpec spec;
    spec.n_subjects = args.subjects;
    spec.n_frames = args.frames;
    spec.n_electrodes = args.electrodes;
    spec.intercept = 1.0;
    spec.roi_offset = {0.3, 0.2, 0.0, -0.5, 0.25, 0.1};
    n400::PredictorTruth sa;
    sa.name = "surprisal_a";
    sa.condition_mean = {4.0, 6.0, 7.0, 9.0};
    sa.sd = 1.0;
    sa.slope = args.slope_a;
    sa.roi_slope_offset = {0.0, 0.0, -0.1, -0.15, 0.0, 0.0};
    n400::PredictorTruth ca;
    ca.name = "cossim_a";
    ca.condition_mean = {0.55, 0.5, 0.45, 0.4};
    ca.sd = 0.08;
    n400::PredictorTruth sb;
    sb.name = "surprisal_b";
    sb.condition_mean = {5.0, 6.0, 6.5, 8.0};
    sb.sd = 1.0;
    sb.slope = args.slope_b;
    n400::PredictorTruth cb;
    cb.name = "cossim_b";
    cb.condition_mean = {0.5, 0.47, 0.44, 0.42};
    cb.sd = 0.08;
    spec.predictors = {sa, ca, sb, cb};
    spec.correlations = {{0, 1, args.rho_a}, {2, 3, args.rho_b}, {0, 2, 0.6}};
    spec.subject_sd = 0.8;
    spec.frame_sd = 0.5;
    spec.electrode_sd = 0.0;
    spec.residual_sd = args.residual_sd;
    spec.seed = args.seed;
    return spec;
}

int run_synth(const SynthArgs& args) {
    RunManifest manifest("synth", args.out);
    manifest.set_option("seed", args.seed);
    manifest.set_option("rho", {args.rho_a, args.rho_b});
    manifest.set_option("slopes", {args.slope_a, args.slope_b});

    const n400::SynthSpec spec = synth_spec_from(args);
    const n400::SynthResult result = n400::generate(spec);
    const auto stimuli = n400::make_stimuli(spec);

    std::ostringstream table_csv;
    result.table.write_csv(table_csv);
    manifest.write_output("table.csv", table_csv.str());

    std::ostringstream truth;
    n400::write_truth(result.truth, truth);
    manifest.write_output("truth.json", truth.str());

    // stimuli.tsv
    std::ostringstream stim;
    stim << "frame_id\tcondition\tsentence\ttarget_index\tcloze\n";
    for (const auto& s : stimuli) {
        stim << s.frame_id << "\t" << n400::to_string(s.condition) << "\t";
        for (std::size_t w = 0; w < s.words.size(); ++w)
            stim << (w ? " " : "") << s.words[w];
        stim << "\t" << s.target_index << "\t" << n400::format_g9(*s.cloze) << "\n";
    }
    manifest.write_output("stimuli.tsv", stim.str());

    // eeg.csv
    std::ostringstream eeg;
    eeg << "subject,frame_id,condition,electrode,roi,amplitude\n";
    const auto& amp = result.table.numeric("amplitude");
    for (std::size_t r = 0; r < result.table.n_rows(); ++r)
        eeg << result.table.categorical("subject")[r] << ","
            << result.table.categorical("frame_id")[r] << ","
            << result.table.categorical("condition")[r] << ","
            << result.table.categorical("electrode")[r] << ","
            << result.table.categorical("roi")[r] << "," << n400::format_g9(amp[r])
            << "\n";
    manifest.write_output("eeg.csv", eeg.str());

    manifest.write_output("lm_output_a.jsonl",
                          n400::emit_lm_fixture(result.table, stimuli, "surprisal_a",
                                                "cossim_a", "a", 4, 2));
    manifest.write_output("lm_output_b.jsonl",
                          n400::emit_lm_fixture(result.table, stimuli, "surprisal_b",
                                                "cossim_b", "b", 4, 1));
    manifest.finalize();
    std::cout << "wrote synthetic bundle to " << args.out << " ("
              << result.table.n_rows() << " rows)\n";
    return 0;
}

struct ReportArgs {
    std::string out = "out";
};

// Rebuild figures from the CSV tables already in the output directory.
int run_report(const ReportArgs& args) {
    RunManifest manifest("report", args.out);
    const fs::path dir(args.out);
    bool made_anything = false;

    auto load_csv = [&](const std::string& name,
                        std::vector<std::vector<std::string>>& rows) {
        const fs::path path = dir / name;
        if (!fs::exists(path)) return false;
        const std::string text = read_file(path);
        manifest.note_input(path, text);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) rows.push_back(n400::split(line, ','));
        }
        return rows.size() > 1;
    };

    {
        std::vector<std::vector<std::string>> rows;
        if (load_csv("ladder.csv", rows)) {
            n400::LadderReport report;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                n400::LadderRung r;
                r.ladder = rows[i][0];
                r.rung = static_cast<std::size_t>(
                    n400::parse_long(rows[i][1], "ladder.csv rung"));
                r.aic_improvement =
                    n400::parse_double(rows[i][6], "ladder.csv aic_improvement");
                report.rungs.push_back(std::move(r));
            }
            std::ostringstream svg;
            n400::write_aic_figure(report, svg);
            manifest.write_output("fig_aic.svg", svg.str());
            made_anything = true;
        }
    }
    {
        std::vector<std::vector<std::string>> rows;
        if (load_csv("conditions.csv", rows)) {
            n400::HoldoutReport report;
            std::map<std::string, bool> series_seen;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                n400::ConditionSummary s;
                s.series = rows[i][0];
                s.condition = rows[i][1];
                s.n = static_cast<std::size_t>(
                    n400::parse_long(rows[i][2], "conditions.csv n"));
                s.mean = n400::parse_double(rows[i][3], "conditions.csv mean");
                s.se = n400::parse_double(rows[i][4], "conditions.csv se");
                if (s.series != "true" && !series_seen.count(s.series)) {
                    series_seen[s.series] = true;
                    report.model_names.push_back(s.series);
                }
                report.condition_means.push_back(std::move(s));
            }
            std::ostringstream svg;
            n400::write_conditions_figure(report, svg);
            manifest.write_output("fig_conditions.svg", svg.str());
            made_anything = true;
        }
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("scatter_", 0) != 0 || entry.path().extension() != ".csv")
            continue;
        std::vector<std::vector<std::string>> rows;
        if (!load_csv(name, rows)) continue;
        n400::CorrelationReport report;
        report.x_column = rows[0][2];
        report.y_column = rows[0][3];
        std::vector<double> xs, ys;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double x = n400::parse_double(rows[i][2], "scatter x");
            const double y = n400::parse_double(rows[i][3], "scatter y");
            report.scatter.emplace_back(rows[i][0], rows[i][1], x, y);
            xs.push_back(x);
            ys.push_back(y);
        }
        if (xs.size() >= 3)
            report.entries.push_back(
                n400::CorrelationEntry{"overall", xs.size(), n400::pearson_r(xs, ys)});
        std::ostringstream svg;
        n400::write_scatter_figure(report, svg);
        manifest.write_output(
            "fig_" + name.substr(0, name.size() - 4) + ".svg", svg.str());
        made_anything = true;
    }

    if (!made_anything)
        throw n400::InputError("report: no ladder.csv, conditions.csv or "
                               "scatter_*.csv found in " + args.out);
    manifest.finalize();
    std::cout << "wrote figures to " << args.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"surprisal, similarity and mixed-model analysis of single-trial "
                 "ERP amplitudes"};
    app.require_subcommand(1);

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand(
        "metrics", "build the analysis table from stimuli, LM output and EEG files");
    metrics_args.source.add_options(metrics, false);
    metrics->add_option("--out", metrics_args.out, "output directory");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit one mixed model and print its summary");
    fit_args.source.add_options(fit);
    fit->add_option("--predictor", fit_args.predictors, "predictor column (repeatable)");
    fit->add_flag("--no-interactions", fit_args.no_interactions,
                  "omit predictor x ROI interactions");
    fit->add_option("--out", fit_args.out, "output directory");

    CompareArgs compare_args;
    auto* compare = app.add_subcommand(
        "compare", "nested-ladder LRT and AIC comparison across predictors");
    compare_args.source.add_options(compare);
    compare->add_option("--predictor", compare_args.predictors,
                        "predictor column (repeatable); shorthand for the ladder "
                        "roi|<p>|<p>:roi");
    compare->add_option("--ladder", compare_args.ladders,
                        "custom ladder 'base+terms|rung|rung' (repeatable)");
    compare->add_option("--fdr", compare_args.fdr, "bh or by (default by)");
    compare->add_option("--out", compare_args.out, "output directory");

    HoldoutArgs holdout_args;
    auto* holdout = app.add_subcommand(
        "holdout", "train/test split, conditional prediction and contrasts");
    holdout_args.source.add_options(holdout);
    holdout->add_option("--predictor", holdout_args.predictors,
                        "predictor column (repeatable)");
    holdout->add_option("--holdout-fraction", holdout_args.fraction,
                        "held-out fraction (default 0.15)");
    holdout->add_option("--seed", holdout_args.seed, "split seed")->required();
    holdout->add_flag("--stratify", holdout_args.stratify,
                      "stratify the split by condition");
    holdout->add_option("--fdr", holdout_args.fdr, "bh or by (default by)");
    holdout->add_option("--out", holdout_args.out, "output directory");

    CorrArgs corr_args;
    auto* corr = app.add_subcommand(
        "corr", "predictor-similarity Pearson correlation per stimulus");
    corr_args.source.add_options(corr);
    corr->add_option("--predictor", corr_args.predictors,
                     "predictor column (repeatable)");
    corr->add_option("--similarity", corr_args.similarities,
                     "similarity column; defaults to the matching cossim_*");
    corr->add_option("--out", corr_args.out, "output directory");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand(
        "synth", "generate a synthetic bundle with known ground truth");
    synth->add_option("--subjects", synth_args.subjects, "subject count");
    synth->add_option("--frames", synth_args.frames, "sentence-frame count");
    synth->add_option("--electrodes", synth_args.electrodes, "electrode count");
    synth->add_option("--rho-a", synth_args.rho_a, "surprisal/similarity rho, model a");
    synth->add_option("--rho-b", synth_args.rho_b, "surprisal/similarity rho, model b");
    synth->add_option("--slope-a", synth_args.slope_a, "amplitude slope on surprisal_a");
    synth->add_option("--slope-b", synth_args.slope_b, "amplitude slope on surprisal_b");
    synth->add_option("--residual-sd", synth_args.residual_sd, "residual noise sd");
    synth->add_option("--seed", synth_args.seed, "generator seed")->required();
    synth->add_option("--out", synth_args.out, "output directory");

    ReportArgs report_args;
    auto* report = app.add_subcommand(
        "report", "render SVG figures from the CSV tables in an output directory");
    report->add_option("--out", report_args.out, "directory holding the CSV tables");

    try {
        app.parse(argc, argv);
        if (metrics->parsed()) return run_metrics(metrics_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (compare->parsed()) return run_compare(compare_args);
        if (holdout->parsed()) return run_holdout(holdout_args);
        if (corr->parsed()) return run_corr(corr_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (report->parsed()) return run_report(report_args);
        return 4;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    } catch (const n400::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
