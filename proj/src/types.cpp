#include "n400/types.hpp"

#include <cmath>

#include "n400/util.hpp"

namespace n400 {

std::string to_string(Condition c) {
    switch (c) {
    case Condition::BestCompletion: return "best";
    case Condition::Related: return "related";
    case Condition::Unrelated: return "unrelated";
    case Condition::Implausible: return "implausible";
    }
    return "?";
}

Condition condition_from_string(const std::string& label) {
    const std::string t = lower(trim(label));
    if (t == "best") return Condition::BestCompletion;
    if (t == "related") return Condition::Related;
    if (t == "unrelated") return Condition::Unrelated;
    if (t == "implausible") return Condition::Implausible;
    throw InputError("unknown condition '" + label +
                     "' (valid: best, related, unrelated, implausible)");
}

std::string to_string(Roi r) {
    switch (r) {
    case Roi::Prefrontal: return "Prefrontal";
    case Roi::FrontoCentral: return "FrontoCentral";
    case Roi::Central: return "Central";
    case Roi::Posterior: return "Posterior";
    case Roi::LeftTemporal: return "LeftTemporal";
    case Roi::RightTemporal: return "RightTemporal";
    }
    return "?";
}

Roi roi_from_string(const std::string& label) {
    std::string t;
    for (char ch : lower(trim(label)))
        if (ch != '-' && ch != '_' && ch != ' ') t.push_back(ch);
    if (t == "prefrontal") return Roi::Prefrontal;
    if (t == "frontocentral") return Roi::FrontoCentral;
    if (t == "central") return Roi::Central;
    if (t == "posterior") return Roi::Posterior;
    if (t == "lefttemporal") return Roi::LeftTemporal;
    if (t == "righttemporal") return Roi::RightTemporal;
    throw InputError("unknown ROI '" + label +
                     "' (valid: Prefrontal, FrontoCentral, Central, Posterior, "
                     "LeftTemporal, RightTemporal)");
}

void Stimulus::validate() const {
    if (frame_id.empty()) throw InputError("stimulus with empty frame_id");
    if (words.empty()) throw InputError("stimulus " + frame_id + ": empty sentence");
    if (target_index >= words.size())
        throw InputError("stimulus " + frame_id + "/" + to_string(condition) +
                         ": target_index " + std::to_string(target_index) +
                         " out of range for " + std::to_string(words.size()) +
                         " words");
    if (cloze) {
        if (!(*cloze >= 0.0 && *cloze <= 1.0))
            throw InputError("stimulus " + frame_id + "/" + to_string(condition) +
                             ": cloze " + format_g9(*cloze) + " outside [0,1]");
        if (condition == Condition::Implausible && *cloze != 0.0)
            throw InputError("stimulus " + frame_id +
                             ": implausible item must have cloze 0, got " +
                             format_g9(*cloze));
    }
}

void LMSentenceRecord::validate() const {
    const std::string key = model_id + "/" + frame_id + "/" + to_string(condition);
    if (tokens.empty()) throw InputError("lm record " + key + ": no tokens");
    if (token_logprobs.size() != tokens.size())
        throw InputError("lm record " + key + ": logprob count " +
                         std::to_string(token_logprobs.size()) + " != token count " +
                         std::to_string(tokens.size()));
    if (embeddings.size() != tokens.size())
        throw InputError("lm record " + key + ": embedding count " +
                         std::to_string(embeddings.size()) + " != token count " +
                         std::to_string(tokens.size()));
    for (std::size_t i = 0; i < token_logprobs.size(); ++i) {
        if (!token_logprobs[i]) continue;
        const double lp = *token_logprobs[i];
        if (!std::isfinite(lp) || lp > 0.0)
            throw InputError("lm record " + key + ": token " + std::to_string(i) +
                             " has invalid logprob " + format_g9(lp) +
                             " (must be finite and <= 0)");
    }
    const std::size_t d = embeddings.front().size();
    if (d == 0) throw InputError("lm record " + key + ": zero-dimensional embedding");
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i].size() != d)
            throw InputError("lm record " + key + ": embedding dimension mismatch (" +
                             std::to_string(embeddings[i].size()) + " vs " +
                             std::to_string(d) + ")");
        double norm2 = 0.0;
        for (double v : embeddings[i]) {
            if (!std::isfinite(v))
                throw InputError("lm record " + key + ": non-finite embedding entry");
            norm2 += v * v;
        }
        if (norm2 == 0.0)
            throw InputError("lm record " + key + ": token " + std::to_string(i) +
                             " has a zero embedding vector");
    }
    // alignment spans must partition [0, n_tokens) in order
    if (word_alignment.empty())
        throw InputError("lm record " + key + ": empty word alignment");
    std::size_t expect = 0;
    for (std::size_t w = 0; w < word_alignment.size(); ++w) {
        const auto [s, e] = word_alignment[w];
        if (s != expect || e <= s)
            throw InputError("lm record " + key + ": alignment gap or overlap at word " +
                             std::to_string(w));
        expect = e;
    }
    if (expect != tokens.size())
        throw InputError("lm record " + key + ": alignment covers " +
                         std::to_string(expect) + " of " +
                         std::to_string(tokens.size()) + " tokens");
}

void TrialMeasurement::validate() const {
    if (!std::isfinite(amplitude))
        throw InputError("trial " + subject + "/" + frame_id + "/" + electrode +
                         ": non-finite amplitude");
}

} // namespace n400
