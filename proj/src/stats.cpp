#include "n400/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "n400/special.hpp"
#include "n400/util.hpp"

namespace n400 {

std::string to_string(Alternative a) {
    switch (a) {
    case Alternative::TwoSided: return "two_sided";
    case Alternative::Less: return "less";
    case Alternative::Greater: return "greater";
    }
    return "?";
}

std::string to_string(FdrMethod m) { return m == FdrMethod::BH ? "bh" : "by"; }

FdrMethod fdr_method_from_string(const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "bh") return FdrMethod::BH;
    if (t == "by") return FdrMethod::BY;
    throw ConfigError("unknown FDR method '" + s + "' (valid: bh, by)");
}

double chi_square_sf(double x, double df) {
    if (!(x >= 0.0)) throw NumericError("chi_square_sf: x must be >= 0");
    if (!(df > 0.0)) throw NumericError("chi_square_sf: df must be > 0");
    return special::gamma_q(0.5 * df, 0.5 * x);
}

double t_sf(double t, double df) {
    if (!(df > 0.0)) throw NumericError("t_sf: df must be > 0");
    if (!std::isfinite(t)) throw NumericError("t_sf: non-finite statistic");
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * special::incbeta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

TestResult lrt(double loglik_reduced, double loglik_full, double df,
               const std::string& label) {
    if (!(df > 0.0)) throw NumericError("lrt: df must be > 0");
    TestResult r;
    r.label = label;
    r.statistic = std::max(0.0, 2.0 * (loglik_full - loglik_reduced));
    r.df = df;
    r.p_raw = chi_square_sf(r.statistic, df);
    r.alternative = Alternative::Greater;
    return r;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b,
                   Alternative alternative, const std::string& label) {
    if (a.size() < 2 || b.size() < 2)
        throw NumericError("welch_t: each sample needs n >= 2");
    const MeanSd ma = mean_sd(a);
    const MeanSd mb = mean_sd(b);
    const double va = ma.sd * ma.sd / static_cast<double>(a.size());
    const double vb = mb.sd * mb.sd / static_cast<double>(b.size());
    if (va + vb <= 0.0) throw NumericError("welch_t: zero variance in both samples");

    TestResult r;
    r.label = label;
    r.alternative = alternative;
    r.statistic = (ma.mean - mb.mean) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / (static_cast<double>(a.size()) - 1.0) +
            vb * vb / (static_cast<double>(b.size()) - 1.0));
    switch (alternative) {
    case Alternative::Greater: r.p_raw = t_sf(r.statistic, r.df); break;
    case Alternative::Less: r.p_raw = 1.0 - t_sf(r.statistic, r.df); break;
    case Alternative::TwoSided:
        r.p_raw = 2.0 * t_sf(std::fabs(r.statistic), r.df);
        break;
    }
    r.p_raw = std::min(1.0, std::max(0.0, r.p_raw));
    return r;
}

std::vector<double> fdr_adjust(std::span<const double> p_values, FdrMethod method) {
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw NumericError("fdr_adjust: p-value outside [0,1]");
    if (m == 0) return {};

    double c = 1.0;
    if (method == FdrMethod::BY) {
        c = 0.0;
        for (std::size_t k = 1; k <= m; ++k) c += 1.0 / static_cast<double>(k);
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });

    // step-up: adjusted_(i) = min(1, min_{j>=i} p_(j) * m * c / j)
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double rank = static_cast<double>(i + 1);
        running = std::min(running, p_values[order[i]] * static_cast<double>(m) * c / rank);
        adjusted[order[i]] = std::min(1.0, running);
    }
    return adjusted;
}

MeanSd mean_sd(std::span<const double> xs) {
    if (xs.size() < 2) throw NumericError("mean_sd: need n >= 2");
    const double mu = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return {mu, std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0))};
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw NumericError("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

} // namespace n400
