#ifndef N400_LMM_HPP
#define N400_LMM_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "n400/nelder_mead.hpp"
#include "n400/stats.hpp"
#include "n400/table.hpp"

namespace n400 {

// Fixed effects are term names: a numeric column, a categorical column
// (treatment-coded against its alphabetically first level), or "a:b" for an
// interaction. Random effects are intercepts per grouping factor. Fits use
// maximum likelihood, never REML, so nested fixed effects are LRT-comparable.
struct ModelSpec {
    std::string outcome = "amplitude";
    std::vector<std::string> fixed_terms;
    std::vector<std::string> random_intercepts;

    std::string formula() const;
};

enum class RankPolicy {
    Error, // rank-deficient X is an error
    Prune  // drop dependent columns in order, recording their names
};

// Treatment-coding metadata; enough to rebuild X for new rows exactly as at
// fit time.
struct FixedCoding {
    std::vector<std::string> terms;
    std::map<std::string, std::vector<std::string>> factor_levels; // sorted
    std::vector<std::string> kept_columns; // after rank pruning, incl. intercept
};

struct DesignMatrices {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;             // n x p, intercept first
    Eigen::SparseMatrix<double> Z; // n x q, one indicator block per factor

    struct FactorBlock {
        std::string name;
        std::vector<std::string> levels; // sorted; Z column = offset + level idx
        std::size_t offset = 0;
    };
    std::vector<FactorBlock> factors;

    FixedCoding coding;
    std::vector<std::string> dropped_columns; // only under RankPolicy::Prune
    std::uint64_t fingerprint = 0;            // over outcome values

    std::size_t n() const { return static_cast<std::size_t>(y.size()); }
    std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
    std::size_t q() const { return static_cast<std::size_t>(Z.cols()); }
};

DesignMatrices build_design(const AnalysisTable& table, const ModelSpec& spec,
                            RankPolicy policy = RankPolicy::Error);

enum class PredictionMode { Marginal, Conditional };

struct FittedModel {
    ModelSpec spec;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t n_params = 0; // p + one variance per factor + residual

    Eigen::VectorXd beta;
    std::vector<std::string> beta_names;
    Eigen::VectorXd beta_se;

    std::vector<double> theta; // per-factor sd ratio sigma_g / sigma
    double sigma2 = 0.0;       // residual variance
    Eigen::VectorXd blups;     // conditional modes b, length q

    double loglik = 0.0;
    bool converged = false;
    bool singular = false; // any theta_g below the singularity threshold
    int optimizer_iterations = 0;

    std::vector<DesignMatrices::FactorBlock> factors;
    FixedCoding coding;
    std::vector<std::string> dropped_columns;
    std::uint64_t data_fingerprint = 0;

    double aic() const {
        return 2.0 * static_cast<double>(n_params) - 2.0 * loglik;
    }
};

struct FitOptions {
    NelderMeadOptions optimizer;           // start theta = 1, spread tol 1e-8
    double singular_threshold = 1e-4;
};

FittedModel fit_ml(const DesignMatrices& design, const FitOptions& options = {});

// Convenience: build + fit.
FittedModel fit_ml(const AnalysisTable& table, const ModelSpec& spec,
                   RankPolicy policy = RankPolicy::Error,
                   const FitOptions& options = {});

// Profiled quantities at a fixed theta; the objective fit_ml minimizes is
// -2 * loglik of this evaluation.
struct ProfileEvaluation {
    double loglik = 0.0;
    Eigen::VectorXd beta;
    double sigma2 = 0.0;
    Eigen::VectorXd u; // spherical random effects; b = theta_g * u
};

ProfileEvaluation evaluate_profile(const DesignMatrices& design,
                                   const std::vector<double>& theta);

// Exact Gaussian log-density of y under N(X beta, sigma2 (I + sum theta_g^2
// Z_g Z_g')), via a dense n x n factorization. Test oracle; n capped at 2000.
double dense_loglik_oracle(const DesignMatrices& design, const Eigen::VectorXd& beta,
                           const std::vector<double>& theta, double sigma2);

// Marginal: X beta. Conditional: adds each factor's BLUP, zero for levels
// unseen at fit time.
Eigen::VectorXd predict(const FittedModel& model, const AnalysisTable& rows,
                        PredictionMode mode);

// LRT between nested ML fits on identical data (fingerprint-checked);
// df = difference in fixed-effect counts.
TestResult lrt(const FittedModel& reduced, const FittedModel& full,
               const std::string& label = "lrt");

// Versioned plain-text summary.
void write_summary(const FittedModel& model, std::ostream& os);

} // namespace n400

#endif
