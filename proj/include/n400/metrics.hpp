#ifndef N400_METRICS_HPP
#define N400_METRICS_HPP

#include <span>
#include <vector>

#include "n400/types.hpp"

namespace n400 {

// -log P, in nats unless another log base is requested.
struct Surprisal {
    double value = 0.0;
};

struct SimilarityScore {
    double cosine_similarity = 0.0; // in [-1, 1]
    double cosine_distance = 1.0;   // 1 - similarity
};

inline constexpr double kBaseE = 0.0; // sentinel: natural log, no conversion

// logprob is a natural-log probability (<= 0). base 0 means nats; any
// base > 1 divides by ln(base), e.g. base 2 for bits.
Surprisal surprisal(double logprob, double base = kBaseE);

// Word-level surprisal: sum of subtoken surprisals over the word's alignment
// span (the word probability is the product of its subtoken probabilities).
Surprisal word_surprisal(const LMSentenceRecord& record, std::size_t word_index,
                         double base = kBaseE);

// Word embedding: mean of the word's subtoken embeddings.
std::vector<double> word_embedding(const LMSentenceRecord& record,
                                   std::size_t word_index);

// Mean of the word embeddings of all words preceding the target; each word
// weighs equally regardless of its subtoken count.
std::vector<double> context_mean_embedding(const LMSentenceRecord& record,
                                           std::size_t target_word_index);

SimilarityScore cosine(std::span<const double> a, std::span<const double> b);

// Context-to-target similarity for one sentence record.
SimilarityScore context_target_similarity(const LMSentenceRecord& record,
                                          std::size_t target_word_index);

double pearson_r(std::span<const double> xs, std::span<const double> ys);

} // namespace n400

#endif
