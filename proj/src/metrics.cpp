#include "n400/metrics.hpp"

#include <cmath>

#include "n400/util.hpp"

namespace n400 {

namespace {

double base_divisor(double base) {
    if (base == kBaseE) return 1.0;
    if (!(base > 1.0) || !std::isfinite(base))
        throw ConfigError("surprisal log base must be > 1");
    return std::log(base);
}

} // namespace

Surprisal surprisal(double logprob, double base) {
    if (!std::isfinite(logprob) || logprob > 0.0)
        throw NumericError("surprisal: logprob must be finite and <= 0, got " +
                           format_g9(logprob));
    return {-logprob / base_divisor(base)};
}

Surprisal word_surprisal(const LMSentenceRecord& record, std::size_t word_index,
                         double base) {
    if (word_index >= record.word_alignment.size())
        throw InputError("word_surprisal: word index " + std::to_string(word_index) +
                         " out of range");
    const auto [start, end] = record.word_alignment[word_index];
    double sum_logprob = 0.0;
    for (std::size_t t = start; t < end; ++t) {
        if (!record.token_logprobs[t]) {
            // a causal LM has no prediction for position 0; that token
            // contributes nothing
            if (t == 0) continue;
            throw InputError("word_surprisal: missing logprob for token " +
                             std::to_string(t) + " in word " +
                             std::to_string(word_index) + " of " + record.frame_id +
                             "/" + to_string(record.condition));
        }
        sum_logprob += *record.token_logprobs[t];
    }
    return surprisal(sum_logprob, base);
}

std::vector<double> word_embedding(const LMSentenceRecord& record,
                                   std::size_t word_index) {
    if (word_index >= record.word_alignment.size())
        throw InputError("word_embedding: word index out of range");
    const auto [start, end] = record.word_alignment[word_index];
    const std::size_t d = record.embeddings.front().size();
    std::vector<double> out(d, 0.0);
    for (std::size_t t = start; t < end; ++t)
        for (std::size_t j = 0; j < d; ++j) out[j] += record.embeddings[t][j];
    const double inv = 1.0 / static_cast<double>(end - start);
    for (double& v : out) v *= inv;
    return out;
}

std::vector<double> context_mean_embedding(const LMSentenceRecord& record,
                                           std::size_t target_word_index) {
    if (target_word_index == 0)
        throw InputError("context_mean_embedding: target at position 0 has no context");
    if (target_word_index >= record.word_alignment.size())
        throw InputError("context_mean_embedding: target index out of range");
    const std::size_t d = record.embeddings.front().size();
    std::vector<double> out(d, 0.0);
    for (std::size_t w = 0; w < target_word_index; ++w) {
        const std::vector<double> we = word_embedding(record, w);
        for (std::size_t j = 0; j < d; ++j) out[j] += we[j];
    }
    const double inv = 1.0 / static_cast<double>(target_word_index);
    for (double& v : out) v *= inv;
    return out;
}

SimilarityScore cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw NumericError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
    if (a.empty()) throw NumericError("cosine: empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine: zero vector");
    const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
    if (!(std::fabs(sim) <= 1.0 + 1e-12))
        throw NumericError("cosine: similarity " + format_g9(sim) + " outside [-1,1]");
    return {sim, 1.0 - sim};
}

SimilarityScore context_target_similarity(const LMSentenceRecord& record,
                                          std::size_t target_word_index) {
    const std::vector<double> ctx = context_mean_embedding(record, target_word_index);
    const std::vector<double> tgt = word_embedding(record, target_word_index);
    return cosine(ctx, tgt);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw NumericError("pearson_r: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw NumericError("pearson_r: need n >= 3");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericError("pearson_r: zero variance series");
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

} // namespace n400
