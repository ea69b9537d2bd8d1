#include "n400/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "n400/util.hpp"

namespace n400 {

namespace {

constexpr double kAlpha = 1.0; // reflection
constexpr double kGamma = 2.0; // expansion
constexpr double kRho = 0.5;   // contraction
constexpr double kSigma = 0.5; // shrink

void clamp_lower(std::vector<double>& x, const std::vector<double>& lower) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::max(x[j], lower[j]);
}

} // namespace

NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const std::vector<double>& lower,
    const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0) throw ConfigError("nelder_mead: empty parameter vector");
    if (lower.size() != n) throw ConfigError("nelder_mead: bound size mismatch");

    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        if (std::isnan(v)) throw NumericError("nelder_mead: objective returned NaN");
        return v;
    };

    std::vector<std::vector<double>> x(n + 1, x0);
    clamp_lower(x[0], lower);
    for (std::size_t i = 0; i < n; ++i) {
        x[i + 1][i] += options.initial_step;
        clamp_lower(x[i + 1], lower);
        // a vertex clamped onto x0 would degenerate the simplex
        if (x[i + 1][i] == x[0][i]) x[i + 1][i] = x[0][i] + options.initial_step;
    }
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(x[i]);

    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> centroid(n), xr(n), xe(n), xk(n);

    for (int it = 0; it < options.max_iterations; ++it) {
        result.iterations = it + 1;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        if (std::fabs(fx[idx[n]] - fx[idx[0]]) <= options.f_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += x[idx[i]][j];
        for (double& c : centroid) c /= static_cast<double>(n);

        const std::vector<double>& worst = x[idx[n]];
        for (std::size_t j = 0; j < n; ++j)
            xr[j] = centroid[j] + kAlpha * (centroid[j] - worst[j]);
        clamp_lower(xr, lower);
        const double fr = eval(xr);

        if (fr < fx[idx[0]]) {
            for (std::size_t j = 0; j < n; ++j)
                xe[j] = centroid[j] + kGamma * (xr[j] - centroid[j]);
            clamp_lower(xe, lower);
            const double fe = eval(xe);
            if (fe < fr) {
                x[idx[n]] = xe;
                fx[idx[n]] = fe;
            } else {
                x[idx[n]] = xr;
                fx[idx[n]] = fr;
            }
            continue;
        }
        if (fr < fx[idx[n - 1]]) {
            x[idx[n]] = xr;
            fx[idx[n]] = fr;
            continue;
        }

        if (fr < fx[idx[n]]) {
            for (std::size_t j = 0; j < n; ++j)
                xk[j] = centroid[j] + kRho * (xr[j] - centroid[j]);
        } else {
            for (std::size_t j = 0; j < n; ++j)
                xk[j] = centroid[j] + kRho * (worst[j] - centroid[j]);
        }
        clamp_lower(xk, lower);
        const double fk = eval(xk);
        if (fk < std::min(fr, fx[idx[n]])) {
            x[idx[n]] = xk;
            fx[idx[n]] = fk;
            continue;
        }

        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                x[idx[i]][j] = x[idx[0]][j] + kSigma * (x[idx[i]][j] - x[idx[0]][j]);
            clamp_lower(x[idx[i]], lower);
            fx[idx[i]] = eval(x[idx[i]]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fx[i] < fx[best]) best = i;
    result.x = x[best];
    result.f = fx[best];
    return result;
}

} // namespace n400
