#include "n400/lmm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "n400/util.hpp"

namespace n400 {

namespace {

constexpr double kRankTol = 1e-8;
// Relative floor keeps the profiled deviance finite on interpolating fits
// (zero residual variance) without breaking scale equivariance.
constexpr double kResidualFloor = 1e-30;

std::string indicator_name(const std::string& column, const std::string& level) {
    return column + "[" + level + "]";
}

struct ComponentColumns {
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> values;
};

// One term part expands to either the numeric column itself or the
// treatment-coded indicators of a categorical column.
ComponentColumns expand_part(const AnalysisTable& table, const std::string& part,
                             const std::map<std::string, std::vector<std::string>>& levels) {
    const std::size_t n = table.n_rows();
    const AnalysisTable::Column& col = table.column(part);
    ComponentColumns out;
    if (col.kind == AnalysisTable::ColumnKind::Numeric) {
        Eigen::VectorXd v(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (!std::isfinite(col.values[r]))
                throw NumericError("column '" + part + "' has a non-finite value");
            v[r] = col.values[r];
        }
        out.names.push_back(part);
        out.values.push_back(std::move(v));
        return out;
    }

    auto it = levels.find(part);
    if (it == levels.end())
        throw ConfigError("no level set for factor '" + part + "'");
    const std::vector<std::string>& levs = it->second;
    if (levs.size() < 2)
        throw InputError("factor '" + part + "' has fewer than 2 levels");
    std::map<std::string, std::size_t> level_index;
    for (std::size_t i = 0; i < levs.size(); ++i) level_index[levs[i]] = i;

    std::vector<Eigen::VectorXd> ind(levs.size() - 1, Eigen::VectorXd::Zero(n));
    for (std::size_t r = 0; r < n; ++r) {
        auto li = level_index.find(col.labels[r]);
        if (li == level_index.end())
            throw NumericError("level '" + col.labels[r] + "' of factor '" + part +
                               "' was unseen at fit time");
        if (li->second > 0) ind[li->second - 1][r] = 1.0; // level 0 is reference
    }
    for (std::size_t i = 1; i < levs.size(); ++i) {
        out.names.push_back(indicator_name(part, levs[i]));
        out.values.push_back(std::move(ind[i - 1]));
    }
    return out;
}

// Expanded candidate columns for one term, interactions as elementwise
// products of the parts' expansions.
ComponentColumns expand_term(const AnalysisTable& table, const std::string& term,
                             const std::map<std::string, std::vector<std::string>>& levels) {
    const std::vector<std::string> parts = split(term, ':');
    for (const std::string& p : parts)
        if (trim(p).empty()) throw ConfigError("malformed term '" + term + "'");
    ComponentColumns acc = expand_part(table, trim(parts[0]), levels);
    for (std::size_t k = 1; k < parts.size(); ++k) {
        const ComponentColumns next = expand_part(table, trim(parts[k]), levels);
        ComponentColumns prod;
        for (std::size_t i = 0; i < acc.names.size(); ++i)
            for (std::size_t j = 0; j < next.names.size(); ++j) {
                prod.names.push_back(acc.names[i] + ":" + next.names[j]);
                prod.values.push_back(acc.values[i].cwiseProduct(next.values[j]));
            }
        acc = std::move(prod);
    }
    return acc;
}

std::map<std::string, std::vector<std::string>> collect_factor_levels(
    const AnalysisTable& table, const std::vector<std::string>& terms) {
    std::map<std::string, std::vector<std::string>> levels;
    for (const std::string& term : terms) {
        for (const std::string& raw : split(term, ':')) {
            const std::string part = trim(raw);
            const AnalysisTable::Column& col = table.column(part);
            if (col.kind == AnalysisTable::ColumnKind::Categorical &&
                !levels.count(part))
                levels[part] = table.levels(part);
        }
    }
    return levels;
}

} // namespace

std::string ModelSpec::formula() const {
    std::string f = outcome + " ~ 1";
    for (const std::string& t : fixed_terms) f += " + " + t;
    for (const std::string& g : random_intercepts) f += " + (1|" + g + ")";
    return f;
}

DesignMatrices build_design(const AnalysisTable& table, const ModelSpec& spec,
                            RankPolicy policy) {
    const std::size_t n = table.n_rows();
    if (n == 0) throw InputError("build_design: empty table");

    DesignMatrices d;

    // outcome
    const std::vector<double>& yv = table.numeric(spec.outcome);
    d.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!std::isfinite(yv[r]))
            throw NumericError("outcome '" + spec.outcome + "' has a non-finite value");
        d.y[r] = yv[r];
    }
    d.fingerprint = fnv1a64(d.y.data(), n * sizeof(double), fnv1a64("y", n));

    // candidate fixed columns: intercept, then terms in order
    d.coding.terms = spec.fixed_terms;
    d.coding.factor_levels = collect_factor_levels(table, spec.fixed_terms);

    std::vector<std::string> names{"(Intercept)"};
    std::vector<Eigen::VectorXd> cols{Eigen::VectorXd::Ones(n)};
    for (const std::string& term : spec.fixed_terms) {
        ComponentColumns cc = expand_term(table, term, d.coding.factor_levels);
        for (std::size_t i = 0; i < cc.names.size(); ++i) {
            names.push_back(std::move(cc.names[i]));
            cols.push_back(std::move(cc.values[i]));
        }
    }

    // rank check by incremental orthogonalization, keeping earlier columns
    std::vector<Eigen::VectorXd> basis;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        Eigen::VectorXd r = cols[i];
        const double norm0 = r.norm();
        for (int pass = 0; pass < 2; ++pass)
            for (const Eigen::VectorXd& b : basis) r -= b.dot(r) * b;
        if (norm0 == 0.0 || r.norm() <= kRankTol * norm0) {
            if (policy == RankPolicy::Error)
                throw NumericError("design matrix is rank deficient: column '" +
                                   names[i] + "' is collinear with earlier columns");
            d.dropped_columns.push_back(names[i]);
            continue;
        }
        basis.push_back(r / r.norm());
        kept.push_back(i);
    }

    d.X.resize(n, kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) {
        d.X.col(j) = cols[kept[j]];
        d.coding.kept_columns.push_back(names[kept[j]]);
    }

    // grouping factors -> indicator blocks of Z
    std::size_t q = 0;
    for (const std::string& g : spec.random_intercepts) {
        DesignMatrices::FactorBlock block;
        block.name = g;
        block.levels = table.levels(g); // throws if not categorical
        if (block.levels.size() < 2)
            throw InputError("grouping factor '" + g + "' has fewer than 2 levels");
        block.offset = q;
        q += block.levels.size();
        d.factors.push_back(std::move(block));
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * d.factors.size());
    for (const auto& block : d.factors) {
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < block.levels.size(); ++i)
            index[block.levels[i]] = i;
        const std::vector<std::string>& labels = table.categorical(block.name);
        for (std::size_t r = 0; r < n; ++r)
            trips.emplace_back(static_cast<int>(r),
                               static_cast<int>(block.offset + index.at(labels[r])), 1.0);
    }
    d.Z.resize(static_cast<int>(n), static_cast<int>(q));
    d.Z.setFromTriplets(trips.begin(), trips.end());

    if (d.p() + d.factors.size() + 1 > n)
        throw InputError("build_design: " + std::to_string(d.p()) +
                         " fixed effects + " + std::to_string(d.factors.size()) +
                         " variances + residual exceed " + std::to_string(n) + " rows");
    return d;
}

namespace {

// Per-theta profiled solve via the penalized normal equations
//   [ D Z'Z D + I   D Z'X ] [u]   [D Z'y]
//   [ X'Z D         X'X   ] [b] = [X'y  ]
// with D the per-column sd-ratio scaling. The q x q block is factored
// sparsely; beta comes from the dense Schur complement.
class ProfiledSolver {
public:
    explicit ProfiledSolver(const DesignMatrices& d) : d_(d) {
        ZtZ_ = (d.Z.transpose() * d.Z).pruned();
        ZtX_ = d.Z.transpose() * d.X;
        Zty_ = d.Z.transpose() * d.y;
        XtX_ = d.X.transpose() * d.X;
        Xty_ = d.X.transpose() * d.y;
        yty_ = d.y.squaredNorm();
        if (yty_ == 0.0)
            throw NumericError("fit_ml: outcome is identically zero");
        col_factor_.resize(d.q());
        for (std::size_t g = 0; g < d.factors.size(); ++g)
            for (std::size_t i = 0; i < d.factors[g].levels.size(); ++i)
                col_factor_[d.factors[g].offset + i] = g;
    }

    struct Solution {
        bool ok = false;
        double deviance = 1e300; // -2 loglik
        double loglik = 0.0;
        Eigen::VectorXd beta;
        Eigen::VectorXd u;
        double sigma2 = 0.0;
        Eigen::MatrixXd schur; // X' V^-1 X; beta covariance = sigma2 * inverse
    };

    Solution solve(const std::vector<double>& theta) {
        const auto n = static_cast<double>(d_.n());
        const std::size_t q = d_.q();
        Solution s;

        if (q == 0) {
            Eigen::LLT<Eigen::MatrixXd> llt(XtX_);
            if (llt.info() != Eigen::Success) return s;
            s.beta = llt.solve(Xty_);
            s.u.resize(0);
            const double r2 = residual_sq(s.beta, Eigen::VectorXd(), theta);
            return finish(s, 0.0, r2, XtX_, n);
        }

        if (theta.size() != d_.factors.size())
            throw ConfigError("theta size mismatch");
        Eigen::VectorXd scale(q);
        for (std::size_t i = 0; i < q; ++i) scale[i] = theta[col_factor_[i]];

        // A = D Z'Z D + I, constant sparsity pattern across theta
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(ZtZ_.nonZeros() + q);
        for (int k = 0; k < ZtZ_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(ZtZ_, k); it; ++it)
                trips.emplace_back(it.row(), it.col(),
                                   it.value() * scale[it.row()] * scale[it.col()]);
        for (std::size_t i = 0; i < q; ++i)
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        Eigen::SparseMatrix<double> A(static_cast<int>(q), static_cast<int>(q));
        A.setFromTriplets(trips.begin(), trips.end());

        if (!pattern_ready_) {
            ldlt_.analyzePattern(A);
            pattern_ready_ = true;
        }
        ldlt_.factorize(A);
        if (ldlt_.info() != Eigen::Success) return s;
        const Eigen::VectorXd dvec = ldlt_.vectorD();
        if ((dvec.array() <= 0.0).any()) return s;
        const double logdet = dvec.array().log().sum();

        const Eigen::MatrixXd B = scale.asDiagonal() * ZtX_;
        const Eigen::VectorXd rhs0 = scale.asDiagonal() * Zty_;
        const Eigen::VectorXd w0 = ldlt_.solve(rhs0);
        const Eigen::MatrixXd w = ldlt_.solve(B);

        Eigen::MatrixXd schur = XtX_ - B.transpose() * w;
        schur = 0.5 * (schur + schur.transpose()).eval();
        Eigen::LLT<Eigen::MatrixXd> llt(schur);
        if (llt.info() != Eigen::Success) return s;

        s.beta = llt.solve(Xty_ - B.transpose() * w0);
        s.u = ldlt_.solve(rhs0 - B * s.beta);
        const double r2 = residual_sq(s.beta, s.u, theta);
        return finish(s, logdet, r2, schur, n);
    }

private:
    // r^2 = |y - X b - Z D u|^2 + |u|^2, computed directly to avoid
    // cancellation in the sufficient-statistic identity.
    double residual_sq(const Eigen::VectorXd& beta, const Eigen::VectorXd& u,
                       const std::vector<double>& theta) const {
        Eigen::VectorXd r = d_.y - d_.X * beta;
        if (u.size() > 0) {
            Eigen::VectorXd b(u.size());
            for (Eigen::Index i = 0; i < u.size(); ++i)
                b[i] = theta[col_factor_[static_cast<std::size_t>(i)]] * u[i];
            r -= d_.Z * b;
        }
        return r.squaredNorm() + (u.size() > 0 ? u.squaredNorm() : 0.0);
    }

    Solution finish(Solution& s, double logdet, double r2, Eigen::MatrixXd schur,
                    double n) const {
        const double r2f = std::max(r2, kResidualFloor * yty_);
        s.sigma2 = r2f / n;
        s.deviance = logdet + n * (1.0 + std::log(2.0 * M_PI * r2f / n));
        s.loglik = -0.5 * s.deviance;
        s.schur = std::move(schur);
        s.ok = std::isfinite(s.deviance);
        if (!s.ok) s.deviance = 1e300;
        return s;
    }

    const DesignMatrices& d_;
    Eigen::SparseMatrix<double> ZtZ_;
    Eigen::MatrixXd ZtX_;
    Eigen::VectorXd Zty_;
    Eigen::MatrixXd XtX_;
    Eigen::VectorXd Xty_;
    double yty_ = 0.0;
    std::vector<std::size_t> col_factor_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool pattern_ready_ = false;
};

} // namespace

FittedModel fit_ml(const DesignMatrices& design, const FitOptions& options) {
    ProfiledSolver solver(design);
    const std::size_t n_factors = design.factors.size();

    std::vector<double> theta_hat(n_factors, 0.0);
    bool converged = true;
    int iterations = 0;

    if (n_factors > 0) {
        const auto objective = [&](const std::vector<double>& theta) {
            return solver.solve(theta).deviance;
        };
        NelderMeadResult opt = nelder_mead_minimize(
            objective, std::vector<double>(n_factors, 1.0),
            std::vector<double>(n_factors, 0.0), options.optimizer);
        theta_hat = opt.x;
        converged = opt.converged;
        iterations = opt.iterations;
    }

    ProfiledSolver::Solution sol = solver.solve(theta_hat);
    if (!sol.ok)
        throw NumericError("fit_ml: profiled solve failed at the optimum");

    FittedModel m;
    m.n = design.n();
    m.p = design.p();
    m.n_params = m.p + n_factors + 1;
    m.beta = sol.beta;
    m.beta_names = design.coding.kept_columns;
    m.theta = theta_hat;
    m.sigma2 = sol.sigma2;
    m.loglik = sol.loglik;
    m.converged = converged;
    m.optimizer_iterations = iterations;
    m.factors = design.factors;
    m.coding = design.coding;
    m.dropped_columns = design.dropped_columns;
    m.data_fingerprint = design.fingerprint;

    m.singular = false;
    for (double t : theta_hat)
        if (t < options.singular_threshold) m.singular = true;

    // blups b = theta_g * u
    m.blups.resize(design.q());
    for (std::size_t g = 0; g < design.factors.size(); ++g) {
        const auto& block = design.factors[g];
        for (std::size_t i = 0; i < block.levels.size(); ++i)
            m.blups[block.offset + i] =
                theta_hat[g] * sol.u[static_cast<Eigen::Index>(block.offset + i)];
    }

    // beta covariance = sigma2 * schur^-1
    Eigen::LLT<Eigen::MatrixXd> llt(sol.schur);
    const Eigen::MatrixXd cov =
        m.sigma2 * llt.solve(Eigen::MatrixXd::Identity(m.p, m.p));
    m.beta_se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return m;
}

FittedModel fit_ml(const AnalysisTable& table, const ModelSpec& spec,
                   RankPolicy policy, const FitOptions& options) {
    DesignMatrices design = build_design(table, spec, policy);
    FittedModel m = fit_ml(design, options);
    m.spec = spec;
    return m;
}

ProfileEvaluation evaluate_profile(const DesignMatrices& design,
                                   const std::vector<double>& theta) {
    ProfiledSolver solver(design);
    ProfiledSolver::Solution sol = solver.solve(theta);
    if (!sol.ok) throw NumericError("evaluate_profile: solve failed");
    return {sol.loglik, sol.beta, sol.sigma2, sol.u};
}

double dense_loglik_oracle(const DesignMatrices& design, const Eigen::VectorXd& beta,
                           const std::vector<double>& theta, double sigma2) {
    const std::size_t n = design.n();
    if (n > 2000)
        throw ConfigError("dense_loglik_oracle: n = " + std::to_string(n) +
                          " exceeds the dense cap of 2000");
    if (!(sigma2 > 0.0)) throw NumericError("dense_loglik_oracle: sigma2 must be > 0");
    if (theta.size() != design.factors.size())
        throw ConfigError("dense_loglik_oracle: theta size mismatch");

    Eigen::VectorXd scale(design.q());
    for (std::size_t g = 0; g < design.factors.size(); ++g)
        for (std::size_t i = 0; i < design.factors[g].levels.size(); ++i)
            scale[design.factors[g].offset + i] = theta[g];

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    if (design.q() > 0) {
        const Eigen::MatrixXd zd = Eigen::MatrixXd(design.Z) * scale.asDiagonal();
        m.noalias() += zd * zd.transpose();
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError("dense_loglik_oracle: covariance not positive definite");

    const Eigen::VectorXd resid = design.y - design.X * beta;
    const double quad = resid.dot(llt.solve(resid)) / sigma2;
    const double logdet_m =
        2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double nn = static_cast<double>(n);
    return -0.5 * (nn * std::log(2.0 * M_PI * sigma2) + logdet_m + quad);
}

Eigen::VectorXd predict(const FittedModel& model, const AnalysisTable& rows,
                        PredictionMode mode) {
    const std::size_t n = rows.n_rows();

    std::vector<std::string> names{"(Intercept)"};
    std::vector<Eigen::VectorXd> cols{Eigen::VectorXd::Ones(n)};
    for (const std::string& term : model.coding.terms) {
        ComponentColumns cc = expand_term(rows, term, model.coding.factor_levels);
        for (std::size_t i = 0; i < cc.names.size(); ++i) {
            names.push_back(std::move(cc.names[i]));
            cols.push_back(std::move(cc.values[i]));
        }
    }
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < names.size(); ++i) by_name[names[i]] = i;

    Eigen::VectorXd yhat = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < model.coding.kept_columns.size(); ++j) {
        auto it = by_name.find(model.coding.kept_columns[j]);
        if (it == by_name.end())
            throw InputError("predict: cannot rebuild column '" +
                             model.coding.kept_columns[j] + "'");
        yhat += model.beta[static_cast<Eigen::Index>(j)] * cols[it->second];
    }

    if (mode == PredictionMode::Conditional) {
        for (const auto& block : model.factors) {
            std::map<std::string, std::size_t> index;
            for (std::size_t i = 0; i < block.levels.size(); ++i)
                index[block.levels[i]] = i;
            const std::vector<std::string>& labels = rows.categorical(block.name);
            for (std::size_t r = 0; r < n; ++r) {
                auto it = index.find(labels[r]);
                if (it != index.end()) // unseen level contributes zero
                    yhat[r] += model.blups[block.offset + it->second];
            }
        }
    }
    return yhat;
}

TestResult lrt(const FittedModel& reduced, const FittedModel& full,
               const std::string& label) {
    if (reduced.data_fingerprint != full.data_fingerprint)
        throw InputError("lrt: models were fit on different data");
    {
        std::set<std::string> a(reduced.spec.random_intercepts.begin(),
                                reduced.spec.random_intercepts.end());
        std::set<std::string> b(full.spec.random_intercepts.begin(),
                                full.spec.random_intercepts.end());
        if (a != b)
            throw InputError("lrt: models differ in random-effect structure");
    }
    const double df = static_cast<double>(full.p) - static_cast<double>(reduced.p);
    if (!(df > 0.0))
        throw InputError("lrt: full model does not add fixed-effect parameters");
    return lrt(reduced.loglik, full.loglik, df, label);
}

void write_summary(const FittedModel& model, std::ostream& os) {
    os << "n400kit lmm summary v1\n";
    os << "formula: " << model.spec.formula() << "\n";
    os << "criterion: ML\n";
    os << "n: " << model.n << "\n";
    os << "fixed_effects: " << model.p << "\n";
    os << "n_params: " << model.n_params << "\n";
    os << "converged: " << (model.converged ? "yes" : "no") << "\n";
    os << "singular: " << (model.singular ? "yes" : "no") << "\n";
    os << "loglik: " << format_g9(model.loglik) << "\n";
    os << "aic: " << format_g9(model.aic()) << "\n";
    os << "sigma: " << format_g9(std::sqrt(model.sigma2)) << "\n";
    os << "theta:\n";
    for (std::size_t g = 0; g < model.factors.size(); ++g)
        os << "  " << model.factors[g].name << " " << format_g9(model.theta[g])
           << "\n";
    os << "coefficients:\n";
    for (std::size_t j = 0; j < model.beta_names.size(); ++j)
        os << "  " << model.beta_names[j] << " "
           << format_g9(model.beta[static_cast<Eigen::Index>(j)]) << " se "
           << format_g9(model.beta_se[static_cast<Eigen::Index>(j)]) << "\n";
    if (!model.dropped_columns.empty()) {
        os << "dropped_columns:";
        for (const std::string& c : model.dropped_columns) os << " " << c;
        os << "\n";
    }
}

} // namespace n400
