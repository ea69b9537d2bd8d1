#ifndef N400_INGEST_HPP
#define N400_INGEST_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "n400/table.hpp"
#include "n400/types.hpp"

namespace n400 {

// Predictor columns derivable from the inputs. Surprisal and similarity need
// one LM record set per model; cloze comes from the stimulus file.
struct PredictorRecipe {
    enum class Kind { Surprisal, CosineSimilarity, Cloze };
    Kind kind = Kind::Surprisal;
    std::string model_id; // unused for Cloze

    std::string column_name() const;

    static PredictorRecipe surprisal(std::string model_id);
    static PredictorRecipe cosine_similarity(std::string model_id);
    static PredictorRecipe cloze();
};

// stimuli.tsv: tab-separated, header with frame_id, condition, sentence,
// target_index and optional cloze. Words are the whitespace tokens of the
// sentence field.
std::vector<Stimulus> parse_stimuli(std::istream& source);

// lm_output.jsonl: one JSON record per line.
std::vector<LMSentenceRecord> parse_lm_output(std::istream& source);

// eeg.csv: one window-mean amplitude per (subject, frame, condition, electrode).
std::vector<TrialMeasurement> parse_eeg(std::istream& source);

// epochs.csv: per-sample rows, reduced via window_mean.
std::vector<EpochSample> parse_epochs(std::istream& source);

// Arithmetic mean of amplitudes with time in [window_start, window_end],
// both bounds inclusive. Errors when no sample falls inside.
double window_mean(std::span<const std::pair<double, double>> samples,
                   double window_start, double window_end);

std::vector<TrialMeasurement> reduce_epochs(const std::vector<EpochSample>& samples,
                                            double window_start, double window_end);

// Join trials with stimuli and LM records on (frame_id, condition), computing
// one column per recipe. Rows come out sorted by subject, frame_id,
// condition, electrode.
AnalysisTable build_analysis_table(const std::vector<Stimulus>& stimuli,
                                   const std::vector<LMSentenceRecord>& lm_records,
                                   const std::vector<TrialMeasurement>& trials,
                                   const std::vector<PredictorRecipe>& recipes,
                                   double log_base = 0.0);

} // namespace n400

#endif
