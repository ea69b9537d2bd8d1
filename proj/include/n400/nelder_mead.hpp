#ifndef N400_NELDER_MEAD_HPP
#define N400_NELDER_MEAD_HPP

#include <functional>
#include <vector>

namespace n400 {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double f_tolerance = 1e-8; // stop when simplex value spread falls below
    int max_iterations = 500;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// Downhill simplex with a lower-bound box constraint: every probe point is
// clamped to x >= lower before evaluation.
NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const std::vector<double>& lower,
    const NelderMeadOptions& options = {});

} // namespace n400

#endif
