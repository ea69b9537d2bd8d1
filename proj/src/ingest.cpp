#include "n400/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "n400/metrics.hpp"
#include "n400/util.hpp"

namespace n400 {

namespace {

using Key = std::pair<std::string, Condition>; // (frame_id, condition)

std::string key_str(const Key& k) {
    return k.first + "/" + to_string(k.second);
}

// Header lookup that reports missing columns by name.
class HeaderIndex {
public:
    HeaderIndex(const std::vector<std::string>& fields, const std::string& what)
        : what_(what) {
        for (std::size_t i = 0; i < fields.size(); ++i) index_[trim(fields[i])] = i;
    }

    std::size_t require(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw InputError(what_ + ": missing required column '" + name + "'");
        return it->second;
    }

    std::optional<std::size_t> optional(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::string what_;
    std::map<std::string, std::size_t> index_;
};

std::vector<std::string> whitespace_tokens(const std::string& sentence) {
    std::vector<std::string> words;
    std::istringstream ss(sentence);
    std::string w;
    while (ss >> w) words.push_back(w);
    return words;
}

bool next_line(std::istream& is, std::string& line, std::size_t& lineno) {
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) return true;
    }
    return false;
}

} // namespace

std::string PredictorRecipe::column_name() const {
    switch (kind) {
    case Kind::Surprisal: return "surprisal_" + model_id;
    case Kind::CosineSimilarity: return "cossim_" + model_id;
    case Kind::Cloze: return "cloze";
    }
    return "?";
}

PredictorRecipe PredictorRecipe::surprisal(std::string model_id) {
    return {Kind::Surprisal, std::move(model_id)};
}

PredictorRecipe PredictorRecipe::cosine_similarity(std::string model_id) {
    return {Kind::CosineSimilarity, std::move(model_id)};
}

PredictorRecipe PredictorRecipe::cloze() { return {Kind::Cloze, {}}; }

std::vector<Stimulus> parse_stimuli(std::istream& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(source, line, lineno))
        throw InputError("stimuli: empty input");
    const HeaderIndex header(split(line, '\t'), "stimuli");
    const std::size_t i_frame = header.require("frame_id");
    const std::size_t i_cond = header.require("condition");
    const std::size_t i_sent = header.require("sentence");
    const std::size_t i_target = header.require("target_index");
    const auto i_cloze = header.optional("cloze");

    std::vector<Stimulus> out;
    while (next_line(source, line, lineno)) {
        const std::string where = "stimuli line " + std::to_string(lineno);
        const std::vector<std::string> f = split(line, '\t');
        const std::size_t need =
            std::max({i_frame, i_cond, i_sent, i_target, i_cloze.value_or(0)}) + 1;
        if (f.size() < need)
            throw InputError(where + ": expected " + std::to_string(need) +
                             " tab-separated fields, got " + std::to_string(f.size()));
        try {
            Stimulus s;
            s.frame_id = trim(f[i_frame]);
            s.condition = condition_from_string(f[i_cond]);
            s.words = whitespace_tokens(f[i_sent]);
            const long ti = parse_long(f[i_target], "target_index");
            if (ti < 0) throw InputError("target_index must be >= 0");
            s.target_index = static_cast<std::size_t>(ti);
            if (i_cloze && !trim(f[*i_cloze]).empty())
                s.cloze = parse_double(f[*i_cloze], "cloze");
            s.validate();
            out.push_back(std::move(s));
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<LMSentenceRecord> parse_lm_output(std::istream& source) {
    std::vector<LMSentenceRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (next_line(source, line, lineno)) {
        const std::string where = "lm output line " + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": invalid JSON: " + e.what());
        }
        try {
            LMSentenceRecord r;
            r.model_id = j.at("model_id").get<std::string>();
            r.frame_id = j.at("frame_id").get<std::string>();
            r.condition = condition_from_string(j.at("condition").get<std::string>());
            r.tokens = j.at("tokens").get<std::vector<std::string>>();
            for (const auto& lp : j.at("logprobs")) {
                if (lp.is_null())
                    r.token_logprobs.emplace_back(std::nullopt);
                else
                    r.token_logprobs.emplace_back(lp.get<double>());
            }
            for (const auto& span : j.at("word_alignment")) {
                if (!span.is_array() || span.size() != 2)
                    throw InputError("word_alignment entries must be [start, end)");
                r.word_alignment.emplace_back(span[0].get<std::size_t>(),
                                              span[1].get<std::size_t>());
            }
            r.embeddings = j.at("embeddings").get<std::vector<std::vector<double>>>();
            r.validate();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(where + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<TrialMeasurement> parse_eeg(std::istream& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(source, line, lineno)) throw InputError("eeg: empty input");
    const HeaderIndex header(split(line, ','), "eeg");
    const std::size_t i_subj = header.require("subject");
    const std::size_t i_frame = header.require("frame_id");
    const std::size_t i_cond = header.require("condition");
    const std::size_t i_elec = header.require("electrode");
    const std::size_t i_roi = header.require("roi");
    const std::size_t i_amp = header.require("amplitude");

    std::vector<TrialMeasurement> out;
    while (next_line(source, line, lineno)) {
        const std::string where = "eeg line " + std::to_string(lineno);
        const std::vector<std::string> f = split(line, ',');
        if (f.size() <= std::max({i_subj, i_frame, i_cond, i_elec, i_roi, i_amp}))
            throw InputError(where + ": too few fields");
        try {
            TrialMeasurement t;
            t.subject = trim(f[i_subj]);
            t.frame_id = trim(f[i_frame]);
            t.condition = condition_from_string(f[i_cond]);
            t.electrode = trim(f[i_elec]);
            t.roi = roi_from_string(f[i_roi]);
            t.amplitude = parse_double(f[i_amp], "amplitude");
            t.validate();
            out.push_back(std::move(t));
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<EpochSample> parse_epochs(std::istream& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(source, line, lineno)) throw InputError("epochs: empty input");
    const HeaderIndex header(split(line, ','), "epochs");
    const std::size_t i_subj = header.require("subject");
    const std::size_t i_frame = header.require("frame_id");
    const std::size_t i_cond = header.require("condition");
    const std::size_t i_elec = header.require("electrode");
    const std::size_t i_roi = header.require("roi");
    const std::size_t i_time = header.require("time_ms");
    const std::size_t i_amp = header.require("amplitude");

    std::vector<EpochSample> out;
    while (next_line(source, line, lineno)) {
        const std::string where = "epochs line " + std::to_string(lineno);
        const std::vector<std::string> f = split(line, ',');
        if (f.size() <= std::max({i_subj, i_frame, i_cond, i_elec, i_roi, i_time, i_amp}))
            throw InputError(where + ": too few fields");
        try {
            EpochSample s;
            s.subject = trim(f[i_subj]);
            s.frame_id = trim(f[i_frame]);
            s.condition = condition_from_string(f[i_cond]);
            s.electrode = trim(f[i_elec]);
            s.roi = roi_from_string(f[i_roi]);
            s.time_ms = parse_double(f[i_time], "time_ms");
            s.amplitude = parse_double(f[i_amp], "amplitude");
            out.push_back(std::move(s));
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    }
    return out;
}

double window_mean(std::span<const std::pair<double, double>> samples,
                   double window_start, double window_end) {
    if (!(window_start <= window_end))
        throw ConfigError("window_mean: start must not exceed end");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [t, amp] : samples) {
        if (t >= window_start && t <= window_end) {
            sum += amp;
            ++count;
        }
    }
    if (count == 0)
        throw InputError("window_mean: no samples in [" + format_g9(window_start) +
                         ", " + format_g9(window_end) + "]");
    return sum / static_cast<double>(count);
}

std::vector<TrialMeasurement> reduce_epochs(const std::vector<EpochSample>& samples,
                                            double window_start, double window_end) {
    // group key carries roi and checks it is constant within the trial
    struct Group {
        Roi roi;
        std::vector<std::pair<double, double>> series;
    };
    std::map<std::tuple<std::string, std::string, Condition, std::string>, Group> groups;
    for (const EpochSample& s : samples) {
        auto key = std::make_tuple(s.subject, s.frame_id, s.condition, s.electrode);
        auto [it, inserted] = groups.try_emplace(key, Group{s.roi, {}});
        if (!inserted && it->second.roi != s.roi)
            throw InputError("epochs: electrode " + s.electrode +
                             " mapped to two ROIs for subject " + s.subject);
        it->second.series.emplace_back(s.time_ms, s.amplitude);
    }
    std::vector<TrialMeasurement> out;
    out.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        TrialMeasurement t;
        t.subject = std::get<0>(key);
        t.frame_id = std::get<1>(key);
        t.condition = std::get<2>(key);
        t.electrode = std::get<3>(key);
        t.roi = group.roi;
        try {
            t.amplitude = window_mean(group.series, window_start, window_end);
        } catch (const InputError& e) {
            throw InputError(std::string(e.what()) + " (trial " + t.subject + "/" +
                             t.frame_id + "/" + to_string(t.condition) + "/" +
                             t.electrode + ")");
        }
        t.validate();
        out.push_back(std::move(t));
    }
    return out;
}

AnalysisTable build_analysis_table(const std::vector<Stimulus>& stimuli,
                                   const std::vector<LMSentenceRecord>& lm_records,
                                   const std::vector<TrialMeasurement>& trials,
                                   const std::vector<PredictorRecipe>& recipes,
                                   double log_base) {
    std::map<Key, const Stimulus*> stim_by_key;
    for (const Stimulus& s : stimuli) {
        auto [it, inserted] = stim_by_key.try_emplace({s.frame_id, s.condition}, &s);
        if (!inserted)
            throw InputError("duplicate stimulus for " +
                             key_str({s.frame_id, s.condition}));
    }

    std::map<std::pair<std::string, Key>, const LMSentenceRecord*> lm_by_key;
    for (const LMSentenceRecord& r : lm_records) {
        auto [it, inserted] =
            lm_by_key.try_emplace({r.model_id, {r.frame_id, r.condition}}, &r);
        if (!inserted)
            throw InputError("duplicate LM record: model " + r.model_id + ", " +
                             key_str({r.frame_id, r.condition}));
    }

    // deterministic row order
    std::vector<const TrialMeasurement*> ordered;
    ordered.reserve(trials.size());
    for (const TrialMeasurement& t : trials) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const TrialMeasurement* a, const TrialMeasurement* b) {
                  return std::tie(a->subject, a->frame_id, a->condition, a->electrode) <
                         std::tie(b->subject, b->frame_id, b->condition, b->electrode);
              });

    // collect every unmatched key up front so the error names them all
    {
        std::set<std::string> missing;
        for (const TrialMeasurement* t : ordered) {
            const Key key{t->frame_id, t->condition};
            if (!stim_by_key.count(key)) {
                missing.insert(key_str(key));
                continue;
            }
            for (const PredictorRecipe& recipe : recipes)
                if (recipe.kind != PredictorRecipe::Kind::Cloze &&
                    !lm_by_key.count({recipe.model_id, key}))
                    missing.insert(recipe.model_id + ":" + key_str(key));
        }
        if (!missing.empty()) {
            std::string msg = "unmatched trial keys:";
            std::size_t shown = 0;
            for (const std::string& k : missing) {
                if (shown++ == 20) {
                    msg += " ... (" + std::to_string(missing.size()) + " total)";
                    break;
                }
                msg += " " + k;
            }
            throw InputError(msg);
        }
    }

    // per-stimulus predictor values, computed once and fanned out to trials
    struct StimulusValues {
        std::vector<double> values; // parallel to recipes
    };
    std::map<Key, StimulusValues> cache;

    auto values_for = [&](const Key& key) -> const StimulusValues& {
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;

        auto sit = stim_by_key.find(key);
        if (sit == stim_by_key.end())
            throw InputError("trial references unknown stimulus " + key_str(key));
        const Stimulus& stim = *sit->second;

        StimulusValues sv;
        for (const PredictorRecipe& recipe : recipes) {
            if (recipe.kind == PredictorRecipe::Kind::Cloze) {
                if (!stim.cloze)
                    throw InputError("stimulus " + key_str(key) +
                                     " has no cloze value but a cloze predictor was requested");
                sv.values.push_back(*stim.cloze);
                continue;
            }
            auto lit = lm_by_key.find({recipe.model_id, key});
            if (lit == lm_by_key.end())
                throw InputError("no LM record for model " + recipe.model_id + ", " +
                                 key_str(key));
            const LMSentenceRecord& rec = *lit->second;
            if (rec.word_count() != stim.words.size())
                throw InputError("LM record for " + key_str(key) + " (model " +
                                 recipe.model_id + ") aligns " +
                                 std::to_string(rec.word_count()) + " words, stimulus has " +
                                 std::to_string(stim.words.size()));
            if (recipe.kind == PredictorRecipe::Kind::Surprisal)
                sv.values.push_back(
                    word_surprisal(rec, stim.target_index, log_base).value);
            else
                sv.values.push_back(
                    context_target_similarity(rec, stim.target_index).cosine_similarity);
        }
        return cache.emplace(key, std::move(sv)).first->second;
    };

    std::vector<std::string> subject, frame, condition, electrode, roi;
    std::vector<double> amplitude;
    std::vector<std::vector<double>> predictor_cols(recipes.size());
    for (const TrialMeasurement* t : ordered) {
        const StimulusValues& sv = values_for({t->frame_id, t->condition});
        subject.push_back(t->subject);
        frame.push_back(t->frame_id);
        condition.push_back(to_string(t->condition));
        electrode.push_back(t->electrode);
        roi.push_back(to_string(t->roi));
        amplitude.push_back(t->amplitude);
        for (std::size_t i = 0; i < recipes.size(); ++i)
            predictor_cols[i].push_back(sv.values[i]);
    }

    AnalysisTable table;
    table.add_categorical("subject", std::move(subject));
    table.add_categorical("frame_id", std::move(frame));
    table.add_categorical("condition", std::move(condition));
    table.add_categorical("electrode", std::move(electrode));
    table.add_categorical("roi", std::move(roi));
    table.add_numeric("amplitude", std::move(amplitude));
    for (std::size_t i = 0; i < recipes.size(); ++i)
        table.add_numeric(recipes[i].column_name(), std::move(predictor_cols[i]));
    return table;
}

} // namespace n400
