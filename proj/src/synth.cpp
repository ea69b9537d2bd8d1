#include "n400/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "n400/util.hpp"

namespace n400 {

namespace {

std::string padded_id(const std::string& prefix, std::size_t index, std::size_t count) {
    std::size_t width = 2;
    for (std::size_t c = count; c > 99; c /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    while (digits.size() < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

double condition_cloze(Condition c) {
    switch (c) {
    case Condition::BestCompletion: return 0.5;
    case Condition::Related: return 0.05;
    case Condition::Unrelated: return 0.02;
    case Condition::Implausible: return 0.0;
    }
    return 0.0;
}

} // namespace

Roi electrode_roi(std::size_t electrode_index) {
    return kRois[electrode_index % kRois.size()];
}

void SynthSpec::validate() const {
    if (n_subjects < 2 || n_frames < 2 || n_electrodes < 2)
        throw ConfigError("synth: subjects, frames and electrodes all need >= 2 levels");
    if (subject_sd < 0 || frame_sd < 0 || electrode_sd < 0 || residual_sd < 0)
        throw ConfigError("synth: standard deviations must be >= 0");
    std::set<std::string> names;
    for (const PredictorTruth& p : predictors) {
        if (p.name.empty()) throw ConfigError("synth: unnamed predictor");
        if (p.sd < 0) throw ConfigError("synth: predictor sd must be >= 0");
        if (!names.insert(p.name).second)
            throw ConfigError("synth: duplicate predictor '" + p.name + "'");
    }
    for (const auto& [i, j, rho] : correlations) {
        if (i >= predictors.size() || j >= predictors.size() || i == j)
            throw ConfigError("synth: correlation references invalid predictor pair");
        if (!(std::fabs(rho) < 1.0))
            throw ConfigError("synth: |rho| must be < 1");
    }
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t k = spec.predictors.size();

    std::vector<std::string> subjects, frames, electrodes;
    for (std::size_t i = 0; i < spec.n_subjects; ++i)
        subjects.push_back(padded_id("S", i, spec.n_subjects));
    for (std::size_t i = 0; i < spec.n_frames; ++i)
        frames.push_back(padded_id("F", i, spec.n_frames));
    for (std::size_t i = 0; i < spec.n_electrodes; ++i)
        electrodes.push_back(padded_id("E", i, spec.n_electrodes));

    GroundTruth truth;
    truth.spec = spec;
    for (const std::string& s : subjects)
        truth.subject_effects[s] = spec.subject_sd * gauss(rng);
    for (const std::string& f : frames)
        truth.frame_effects[f] = spec.frame_sd * gauss(rng);
    for (const std::string& e : electrodes)
        truth.electrode_effects[e] = spec.electrode_sd * gauss(rng);

    // correlated predictor innovations via Cholesky of the target correlation
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(k, k);
    for (const auto& [i, j, rho] : spec.correlations) {
        corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho;
        corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rho;
    }
    Eigen::MatrixXd chol;
    if (k > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success)
            throw ConfigError("synth: correlation matrix is not positive definite");
        chol = llt.matrixL();
    }

    // per (frame, condition) predictor values, frame-major then condition
    std::map<std::pair<std::string, Condition>, std::vector<double>> cell_values;
    for (const std::string& f : frames) {
        for (Condition c : kConditions) {
            Eigen::VectorXd z(k);
            for (std::size_t i = 0; i < k; ++i) z[static_cast<Eigen::Index>(i)] = gauss(rng);
            if (k > 0) z = chol * z;
            std::vector<double> values(k);
            for (std::size_t i = 0; i < k; ++i) {
                const PredictorTruth& p = spec.predictors[i];
                values[i] = p.condition_mean[static_cast<std::size_t>(c)] +
                            p.sd * z[static_cast<Eigen::Index>(i)];
            }
            cell_values[{f, c}] = std::move(values);
        }
    }

    const std::size_t n =
        spec.n_subjects * spec.n_frames * kConditions.size() * spec.n_electrodes;
    std::vector<std::string> col_subject, col_frame, col_condition, col_electrode,
        col_roi;
    std::vector<double> col_amplitude;
    std::vector<std::vector<double>> col_pred(k);
    col_subject.reserve(n);

    for (const std::string& s : subjects) {
        for (const std::string& f : frames) {
            for (Condition c : kConditions) {
                const std::vector<double>& values = cell_values.at({f, c});
                for (std::size_t ei = 0; ei < spec.n_electrodes; ++ei) {
                    const Roi roi = electrode_roi(ei);
                    const auto ri = static_cast<std::size_t>(roi);
                    double amp = spec.intercept + spec.roi_offset[ri];
                    for (std::size_t i = 0; i < k; ++i) {
                        const PredictorTruth& p = spec.predictors[i];
                        amp += values[i] * (p.slope + p.roi_slope_offset[ri]);
                    }
                    amp += truth.subject_effects.at(s) + truth.frame_effects.at(f) +
                           truth.electrode_effects.at(electrodes[ei]);
                    amp += spec.residual_sd * gauss(rng);

                    col_subject.push_back(s);
                    col_frame.push_back(f);
                    col_condition.push_back(to_string(c));
                    col_electrode.push_back(electrodes[ei]);
                    col_roi.push_back(to_string(roi));
                    col_amplitude.push_back(amp);
                    for (std::size_t i = 0; i < k; ++i)
                        col_pred[i].push_back(values[i]);
                }
            }
        }
    }

    SynthResult out;
    out.table.add_categorical("subject", std::move(col_subject));
    out.table.add_categorical("frame_id", std::move(col_frame));
    out.table.add_categorical("condition", std::move(col_condition));
    out.table.add_categorical("electrode", std::move(col_electrode));
    out.table.add_categorical("roi", std::move(col_roi));
    out.table.add_numeric("amplitude", std::move(col_amplitude));
    for (std::size_t i = 0; i < k; ++i)
        out.table.add_numeric(spec.predictors[i].name, std::move(col_pred[i]));
    out.truth = std::move(truth);
    return out;
}

std::vector<Stimulus> make_stimuli(const SynthSpec& spec, std::size_t context_words) {
    if (context_words < 1)
        throw ConfigError("make_stimuli: need at least one context word");
    std::vector<Stimulus> out;
    for (std::size_t fi = 0; fi < spec.n_frames; ++fi) {
        const std::string frame = padded_id("F", fi, spec.n_frames);
        for (Condition c : kConditions) {
            Stimulus s;
            s.frame_id = frame;
            s.condition = c;
            for (std::size_t w = 0; w < context_words; ++w)
                s.words.push_back("ctx" + std::to_string(fi) + "w" + std::to_string(w));
            s.words.push_back("tgt" + std::to_string(fi) + to_string(c));
            s.target_index = context_words;
            s.cloze = condition_cloze(c);
            s.validate();
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string emit_lm_fixture(const AnalysisTable& table,
                            const std::vector<Stimulus>& stimuli,
                            const std::string& surprisal_column,
                            const std::string& cossim_column,
                            const std::string& model_id, std::size_t embed_dim,
                            std::size_t subtokens_per_word) {
    if (embed_dim < 2)
        throw ConfigError("emit_lm_fixture: embedding dimension must be >= 2");
    if (subtokens_per_word < 1)
        throw ConfigError("emit_lm_fixture: need >= 1 subtoken per word");

    // planted values per (frame, condition), constant across trials
    std::map<std::pair<std::string, std::string>, std::pair<double, double>> planted;
    const auto& frames = table.categorical("frame_id");
    const auto& conds = table.categorical("condition");
    const auto& surp = table.numeric(surprisal_column);
    const auto& coss = table.numeric(cossim_column);
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        planted[{frames[r], conds[r]}] = {surp[r], coss[r]};

    std::ostringstream out;
    for (const Stimulus& stim : stimuli) {
        auto it = planted.find({stim.frame_id, to_string(stim.condition)});
        if (it == planted.end()) continue; // stimulus without planted values
        const auto [surprisal_value, cosine_value] = it->second;
        if (surprisal_value < 0.0)
            throw NumericError("emit_lm_fixture: planted surprisal " +
                               format_g9(surprisal_value) + " is negative");
        if (!(std::fabs(cosine_value) < 1.0))
            throw NumericError("emit_lm_fixture: planted cosine " +
                               format_g9(cosine_value) + " outside (-1, 1)");
        if (stim.target_index == 0)
            throw InputError("emit_lm_fixture: target at position 0 has no context");

        nlohmann::json rec;
        rec["model_id"] = model_id;
        rec["frame_id"] = stim.frame_id;
        rec["condition"] = to_string(stim.condition);

        nlohmann::json tokens = nlohmann::json::array();
        nlohmann::json logprobs = nlohmann::json::array();
        nlohmann::json alignment = nlohmann::json::array();
        nlohmann::json embeddings = nlohmann::json::array();

        const double target_token_logprob =
            -surprisal_value / static_cast<double>(subtokens_per_word);
        std::vector<double> context_vec(embed_dim, 0.0);
        context_vec[0] = 1.0;
        std::vector<double> target_vec(embed_dim, 0.0);
        target_vec[0] = cosine_value;
        target_vec[1] = std::sqrt(1.0 - cosine_value * cosine_value);

        std::size_t tok = 0;
        for (std::size_t w = 0; w < stim.words.size(); ++w) {
            const bool is_target = (w == stim.target_index);
            alignment.push_back({tok, tok + subtokens_per_word});
            for (std::size_t piece = 0; piece < subtokens_per_word; ++piece, ++tok) {
                tokens.push_back(subtokens_per_word == 1
                                     ? stim.words[w]
                                     : stim.words[w] + "@" + std::to_string(piece));
                if (tok == 0)
                    logprobs.push_back(nullptr); // no prediction for position 0
                else if (is_target)
                    logprobs.push_back(target_token_logprob);
                else
                    logprobs.push_back(-1.0);
                embeddings.push_back(is_target ? target_vec : context_vec);
            }
        }
        rec["tokens"] = std::move(tokens);
        rec["logprobs"] = std::move(logprobs);
        rec["word_alignment"] = std::move(alignment);
        rec["embeddings"] = std::move(embeddings);
        out << rec.dump() << "\n";
    }
    return out.str();
}

void write_truth(const GroundTruth& truth, std::ostream& os) {
    nlohmann::json j;
    j["generator"] = version_string();
    j["seed"] = truth.spec.seed;
    j["counts"] = {{"subjects", truth.spec.n_subjects},
                   {"frames", truth.spec.n_frames},
                   {"electrodes", truth.spec.n_electrodes},
                   {"conditions", 4}};
    j["intercept"] = truth.spec.intercept;
    for (Roi r : kRois)
        j["roi_offset"][to_string(r)] =
            truth.spec.roi_offset[static_cast<std::size_t>(r)];
    for (const PredictorTruth& p : truth.spec.predictors) {
        nlohmann::json pj;
        pj["name"] = p.name;
        pj["sd"] = p.sd;
        pj["slope"] = p.slope;
        for (Condition c : kConditions)
            pj["condition_mean"][to_string(c)] =
                p.condition_mean[static_cast<std::size_t>(c)];
        for (Roi r : kRois)
            pj["roi_slope_offset"][to_string(r)] =
                p.roi_slope_offset[static_cast<std::size_t>(r)];
        j["predictors"].push_back(pj);
    }
    for (const auto& [i, k, rho] : truth.spec.correlations)
        j["correlations"].push_back({{"first", i}, {"second", k}, {"rho", rho}});
    j["sd"] = {{"subject", truth.spec.subject_sd},
               {"frame", truth.spec.frame_sd},
               {"electrode", truth.spec.electrode_sd},
               {"residual", truth.spec.residual_sd}};
    j["subject_effects"] = truth.subject_effects;
    j["frame_effects"] = truth.frame_effects;
    j["electrode_effects"] = truth.electrode_effects;
    os << j.dump(2) << "\n";
}

std::vector<double> expected_coefficients(const GroundTruth& truth,
                                          const std::vector<std::string>& beta_names) {
    // reference ROI is the alphabetically first label, as in build_design
    std::vector<std::string> roi_labels;
    for (Roi r : kRois) roi_labels.push_back(to_string(r));
    std::sort(roi_labels.begin(), roi_labels.end());
    const std::size_t ref = static_cast<std::size_t>(roi_from_string(roi_labels.front()));

    const auto pred_by_name = [&](const std::string& name) -> const PredictorTruth& {
        for (const PredictorTruth& p : truth.spec.predictors)
            if (p.name == name) return p;
        throw ConfigError("expected_coefficients: unknown predictor '" + name + "'");
    };

    std::vector<double> out;
    for (const std::string& name : beta_names) {
        if (name == "(Intercept)") {
            out.push_back(truth.spec.intercept + truth.spec.roi_offset[ref]);
            continue;
        }
        const auto bracket = name.find("roi[");
        if (bracket != std::string::npos) {
            const auto close = name.find(']', bracket);
            const std::size_t roi = static_cast<std::size_t>(
                roi_from_string(name.substr(bracket + 4, close - bracket - 4)));
            if (bracket == 0) { // main ROI contrast
                out.push_back(truth.spec.roi_offset[roi] - truth.spec.roi_offset[ref]);
            } else { // "<pred>:roi[...]"
                const PredictorTruth& p = pred_by_name(name.substr(0, bracket - 1));
                out.push_back(p.roi_slope_offset[roi] - p.roi_slope_offset[ref]);
            }
            continue;
        }
        const PredictorTruth& p = pred_by_name(name);
        out.push_back(p.slope + p.roi_slope_offset[ref]);
    }
    return out;
}

} // namespace n400
