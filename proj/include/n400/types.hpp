#ifndef N400_TYPES_HPP
#define N400_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace n400 {

enum class Condition { BestCompletion, Related, Unrelated, Implausible };

enum class Roi { Prefrontal, FrontoCentral, Central, Posterior, LeftTemporal, RightTemporal };

inline constexpr std::array<Condition, 4> kConditions = {
    Condition::BestCompletion, Condition::Related, Condition::Unrelated,
    Condition::Implausible};

inline constexpr std::array<Roi, 6> kRois = {
    Roi::Prefrontal,   Roi::FrontoCentral, Roi::Central,
    Roi::Posterior,    Roi::LeftTemporal,  Roi::RightTemporal};

// File-format labels: best / related / unrelated / implausible.
std::string to_string(Condition c);
Condition condition_from_string(const std::string& label);

std::string to_string(Roi r);
// Accepts "FrontoCentral", "Fronto-central", "fronto_central", ... (case and
// separator insensitive).
Roi roi_from_string(const std::string& label);

// One stimulus sentence: a frame paired with a condition-specific target word.
struct Stimulus {
    std::string frame_id;
    Condition condition = Condition::BestCompletion;
    std::vector<std::string> words;
    std::size_t target_index = 0;
    std::optional<double> cloze;

    void validate() const; // throws InputError on invariant violation
};

// Per-sentence output of one language model: subtoken log-probabilities
// (natural log), word-to-subtoken alignment, and context-free embeddings.
struct LMSentenceRecord {
    std::string model_id;
    std::string frame_id;
    Condition condition = Condition::BestCompletion;
    std::vector<std::string> tokens;
    std::vector<std::optional<double>> token_logprobs; // first may be absent
    std::vector<std::pair<std::size_t, std::size_t>> word_alignment; // [start,end)
    std::vector<std::vector<double>> embeddings; // one vector of dim d per token

    std::size_t word_count() const { return word_alignment.size(); }
    void validate() const;
};

// One subject x sentence x electrode window-mean amplitude observation.
struct TrialMeasurement {
    std::string subject;
    std::string frame_id;
    Condition condition = Condition::BestCompletion;
    std::string electrode;
    Roi roi = Roi::Central;
    double amplitude = 0.0; // microvolts, mean over the analysis window

    void validate() const;
};

// One raw epoch sample, reduced to a TrialMeasurement via window_mean.
struct EpochSample {
    std::string subject;
    std::string frame_id;
    Condition condition = Condition::BestCompletion;
    std::string electrode;
    Roi roi = Roi::Central;
    double time_ms = 0.0;
    double amplitude = 0.0;
};

} // namespace n400

#endif
