#ifndef N400_STATS_HPP
#define N400_STATS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace n400 {

enum class Alternative { TwoSided, Less, Greater };

std::string to_string(Alternative a);

enum class FdrMethod { BH, BY };

std::string to_string(FdrMethod m);
FdrMethod fdr_method_from_string(const std::string& s);

struct TestResult {
    std::string label;
    double statistic = 0.0;
    double df = 0.0; // fractional for Welch
    double p_raw = 1.0;
    std::optional<double> p_adjusted;
    Alternative alternative = Alternative::TwoSided;
};

// Upper-tail chi-square probability Q(df/2, x/2).
double chi_square_sf(double x, double df);

// Upper-tail Student-t probability.
double t_sf(double t, double df);

// Likelihood ratio test between nested ML fits. Statistic is clamped at 0;
// a slightly negative 2*delta-loglik is optimizer noise, not evidence.
TestResult lrt(double loglik_reduced, double loglik_full, double df,
               const std::string& label = "lrt");

// Welch two-sample t-test with Satterthwaite degrees of freedom.
TestResult welch_t(std::span<const double> a, std::span<const double> b,
                   Alternative alternative, const std::string& label = "welch");

// Step-up FDR adjustment, returned in the input order.
std::vector<double> fdr_adjust(std::span<const double> p_values, FdrMethod method);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // n-1 denominator
};

MeanSd mean_sd(std::span<const double> xs);

double mean(std::span<const double> xs);

} // namespace n400

#endif
