#ifndef N400_SYNTH_HPP
#define N400_SYNTH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "n400/table.hpp"
#include "n400/types.hpp"

namespace n400 {

// Ground-truth predictor: per-condition Gaussian values shared by every
// trial of a (frame, condition) cell, entering the amplitude with a slope
// that may vary by ROI.
struct PredictorTruth {
    std::string name;
    std::array<double, 4> condition_mean{}; // indexed by Condition order
    double sd = 1.0;
    double slope = 0.0;
    std::array<double, 6> roi_slope_offset{}; // indexed by Roi order
};

struct SynthSpec {
    std::size_t n_subjects = 10;
    std::size_t n_frames = 50;
    std::size_t n_electrodes = 8; // assigned to ROIs round-robin

    double intercept = 0.0;
    std::array<double, 6> roi_offset{}; // indexed by Roi order

    std::vector<PredictorTruth> predictors;
    // pairwise target correlations between predictor innovations
    std::vector<std::tuple<std::size_t, std::size_t, double>> correlations;

    double subject_sd = 1.0;
    double frame_sd = 1.0;
    double electrode_sd = 0.5;
    double residual_sd = 1.0;

    std::uint64_t seed = 1;

    void validate() const;
};

struct GroundTruth {
    SynthSpec spec;
    std::map<std::string, double> subject_effects;
    std::map<std::string, double> frame_effects;
    std::map<std::string, double> electrode_effects;
};

struct SynthResult {
    AnalysisTable table;
    GroundTruth truth;
};

// Rows in canonical order (subject, frame, condition, electrode); amplitude =
// fixed part + random intercepts + Gaussian noise, fully determined by seed.
SynthResult generate(const SynthSpec& spec);

// Synthetic stimuli matching the generator's frames: a fixed-length context
// followed by a per-condition target word, with condition-typical cloze.
std::vector<Stimulus> make_stimuli(const SynthSpec& spec,
                                   std::size_t context_words = 5);

// LM-output records whose derived surprisal and context-target cosine equal
// the planted per-(frame, condition) column values exactly: logprobs are
// back-solved from surprisal (natural log), embeddings are unit vectors at
// the planted cosine to the context direction.
std::string emit_lm_fixture(const AnalysisTable& table,
                            const std::vector<Stimulus>& stimuli,
                            const std::string& surprisal_column,
                            const std::string& cossim_column,
                            const std::string& model_id, std::size_t embed_dim = 4,
                            std::size_t subtokens_per_word = 1);

void write_truth(const GroundTruth& truth, std::ostream& os);

// Coded coefficient expectations for the generating model, aligned to design
// column names ("(Intercept)", "roi[...]", "<pred>", "<pred>:roi[...]").
std::vector<double> expected_coefficients(const GroundTruth& truth,
                                          const std::vector<std::string>& beta_names);

Roi electrode_roi(std::size_t electrode_index);

} // namespace n400

#endif
