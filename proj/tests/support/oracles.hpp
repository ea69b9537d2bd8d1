#ifndef N400_TESTS_ORACLES_HPP
#define N400_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. Everything here
// deliberately avoids the library's own special-function and fitting paths:
// survival functions come from adaptive quadrature of the densities, least
// squares from Eigen's QR, and the one-way variance components from the
// closed-form balanced-design estimators.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

inline double adaptive_simpson_step(const std::function<double(double)>& f, double a,
                                    double b, double fa, double fb, double fm,
                                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("adaptive simpson: depth exhausted");
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    const double half_tol = std::max(tol / 2.0, 5e-17); // don't chase eps noise
    return adaptive_simpson_step(f, a, m, fa, fm, flm, left, half_tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, fb, frm, right, half_tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_step(f, a, b, fa, fb, fm, whole, tol, 60);
}

// Chi-square upper tail by integrating the density of T = sqrt(X); the
// substitution removes the df=1 endpoint singularity.
inline double chi2_sf_quadrature(double x, double df) {
    if (x <= 0.0) return 1.0;
    const double log_norm =
        (0.5 * df) * std::log(2.0) + std::lgamma(0.5 * df);
    auto density_sqrt = [&](double t) {
        if (t == 0.0 && df < 2.0) return 0.0; // limit of t^(df-1) at df in (1,2)
        return 2.0 * std::exp((df - 1.0) * std::log(t) - 0.5 * t * t - log_norm);
    };
    const double cdf = adaptive_simpson(density_sqrt, 0.0, std::sqrt(x));
    return 1.0 - cdf;
}

// Student-t upper tail: 0.5 minus the integral of the density over [0, t].
inline double t_sf_quadrature(double t, double df) {
    const double log_norm = std::lgamma(0.5 * (df + 1.0)) -
                            std::lgamma(0.5 * df) -
                            0.5 * std::log(df * M_PI);
    auto density = [&](double s) {
        return std::exp(log_norm -
                        0.5 * (df + 1.0) * std::log1p(s * s / df));
    };
    const double at = std::fabs(t);
    const double half = adaptive_simpson(density, 0.0, at);
    return t >= 0.0 ? 0.5 - half : 0.5 + half;
}

// Standard normal upper tail via erfc.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Ordinary least squares by QR, independent of the library's Schur-based path.
inline Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return x.colPivHouseholderQr().solve(y);
}

// Closed-form ML estimators for the balanced one-way random-intercept layout
// (g groups, m replicates): variance ratios from the between/within split.
struct OneWayML {
    double theta; // sd ratio sigma_b / sigma_e
    double sigma2;
    double mu;
};

inline OneWayML balanced_oneway_ml(const std::vector<std::vector<double>>& groups) {
    const std::size_t g = groups.size();
    const std::size_t m = groups.front().size();
    for (const auto& grp : groups)
        if (grp.size() != m) throw std::runtime_error("layout not balanced");
    const double n = static_cast<double>(g * m);

    double grand = 0.0;
    std::vector<double> means(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        for (double v : groups[i]) means[i] += v;
        means[i] /= static_cast<double>(m);
        grand += means[i];
    }
    grand /= static_cast<double>(g);

    double ssb = 0.0, ssw = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        ssb += static_cast<double>(m) * (means[i] - grand) * (means[i] - grand);
        for (double v : groups[i]) ssw += (v - means[i]) * (v - means[i]);
    }

    OneWayML out;
    out.mu = grand;
    const double within = ssw / (n - static_cast<double>(g));
    const double between = ssb / static_cast<double>(g); // ML divisor, not g-1
    if (between >= within) {
        out.sigma2 = within;
        const double tau = (between - within) / static_cast<double>(m);
        out.theta = std::sqrt(tau / within);
    } else {
        out.sigma2 = (ssb + ssw) / n; // boundary case: no group variance
        out.theta = 0.0;
    }
    return out;
}

// Kolmogorov-Smirnov uniformity p-value (asymptotic Kolmogorov distribution).
inline double ks_uniform_pvalue(std::vector<double> ps) {
    const std::size_t n = ps.size();
    if (n == 0) throw std::runtime_error("ks: empty sample");
    std::sort(ps.begin(), ps.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        d = std::max({d, std::fabs(ps[i] - lo), std::fabs(ps[i] - hi)});
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) *
             std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

} // namespace oracles

#endif
