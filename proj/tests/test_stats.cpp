#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "n400/stats.hpp"
#include "n400/util.hpp"
#include "support/oracles.hpp"

using namespace n400;

TEST_CASE("lrt: no improvement gives statistic 0, p 1") {
    const TestResult r = lrt(-100.0, -100.0, 1.0);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_raw == 1.0);
}

TEST_CASE("lrt: logliks -101 and -100 with df 1") {
    const TestResult r = lrt(-101.0, -100.0, 1.0);
    CHECK(r.statistic == doctest::Approx(2.0));
    CHECK(r.p_raw == doctest::Approx(oracles::chi2_sf_quadrature(2.0, 1.0)).epsilon(1e-9));
    CHECK(r.p_raw == doctest::Approx(0.15730).epsilon(1e-4));
}

TEST_CASE("lrt clamps negative statistics at zero") {
    const TestResult r = lrt(-100.0, -100.0000001, 2.0);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_raw == 1.0);
}

TEST_CASE("lrt rejects df <= 0") {
    CHECK_THROWS_AS(lrt(-101.0, -100.0, 0.0), NumericError);
}

TEST_CASE("welch_t hand example") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{2.0, 3.0, 4.0};
    const TestResult r = welch_t(a, b, Alternative::Less);
    CHECK(r.statistic == doctest::Approx(-1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(r.statistic == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(r.df == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.p_raw ==
          doctest::Approx(1.0 - oracles::t_sf_quadrature(r.statistic, 4.0)).epsilon(1e-9));
}

TEST_CASE("welch_t identical samples") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const TestResult r = welch_t(a, a, Alternative::Less);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_raw == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("welch_t antisymmetry under sample swap") {
    const std::vector<double> a{0.3, 1.9, 2.2, 0.8};
    const std::vector<double> b{1.4, 2.6, 3.3};
    const TestResult ab = welch_t(a, b, Alternative::Less);
    const TestResult ba = welch_t(b, a, Alternative::Less);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-12));
    CHECK(ab.df == doctest::Approx(ba.df).epsilon(1e-12));
    CHECK(ab.p_raw == doctest::Approx(1.0 - ba.p_raw).epsilon(1e-9));
}

TEST_CASE("welch_t reduces to classical df for equal sizes and variances") {
    // shifted copies share the sample variance exactly
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> b;
    for (double v : a) b.push_back(v + 10.0);
    const TestResult r = welch_t(a, b, Alternative::TwoSided);
    CHECK(r.df == doctest::Approx(8.0).epsilon(1e-12)); // n_a + n_b - 2
}

TEST_CASE("welch_t error paths") {
    const std::vector<double> tiny{1.0};
    const std::vector<double> ok{1.0, 2.0};
    const std::vector<double> flat{3.0, 3.0, 3.0};
    CHECK_THROWS_AS(welch_t(tiny, ok, Alternative::Less), NumericError);
    CHECK_THROWS_AS(welch_t(flat, flat, Alternative::Less), NumericError);
}

TEST_CASE("fdr_adjust BH worked example") {
    const std::vector<double> ps{0.01, 0.04, 0.03, 0.005};
    const std::vector<double> adj = fdr_adjust(ps, FdrMethod::BH);
    REQUIRE(adj.size() == 4);
    CHECK(adj[0] == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(adj[1] == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(adj[2] == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(adj[3] == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("fdr_adjust single p is unchanged") {
    const std::vector<double> ps{0.037};
    CHECK(fdr_adjust(ps, FdrMethod::BH)[0] == doctest::Approx(0.037));
    CHECK(fdr_adjust(ps, FdrMethod::BY)[0] == doctest::Approx(0.037));
}

TEST_CASE("fdr_adjust equal p-values collapse to min(1, p*c)") {
    const std::vector<double> ps{0.2, 0.2, 0.2};
    const std::vector<double> bh = fdr_adjust(ps, FdrMethod::BH);
    const std::vector<double> by = fdr_adjust(ps, FdrMethod::BY);
    const double harmonic = 1.0 + 0.5 + 1.0 / 3.0;
    for (double v : bh) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
    for (double v : by) CHECK(v == doctest::Approx(0.2 * harmonic).epsilon(1e-12));
}

TEST_CASE("fdr_adjust properties: rank order, BY >= BH, adjusted >= raw") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> ps(12);
        for (double& p : ps) p = unif(rng);
        const std::vector<double> bh = fdr_adjust(ps, FdrMethod::BH);
        const std::vector<double> by = fdr_adjust(ps, FdrMethod::BY);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            CHECK(bh[i] >= ps[i] - 1e-15);
            CHECK(by[i] >= bh[i] - 1e-15);
            CHECK(bh[i] <= 1.0);
            for (std::size_t j = 0; j < ps.size(); ++j)
                if (ps[i] < ps[j]) CHECK(bh[i] <= bh[j] + 1e-15);
        }
    }
}

TEST_CASE("fdr_adjust rejects out-of-range p") {
    const std::vector<double> bad{0.5, 1.2};
    CHECK_THROWS_AS(fdr_adjust(bad, FdrMethod::BH), NumericError);
}

TEST_CASE("mean_sd") {
    const std::vector<double> constant{1.0, 1.0, 1.0};
    const MeanSd c = mean_sd(constant);
    CHECK(c.mean == 1.0);
    CHECK(c.sd == 0.0);

    const std::vector<double> pair{0.0, 2.0};
    const MeanSd p = mean_sd(pair);
    CHECK(p.mean == doctest::Approx(1.0));
    CHECK(p.sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<double> xs{3.0, 1.0, 2.0};
    const std::vector<double> permuted{1.0, 2.0, 3.0};
    CHECK(mean_sd(xs).mean == doctest::Approx(mean_sd(permuted).mean));
    CHECK(mean_sd(xs).sd == doctest::Approx(mean_sd(permuted).sd));

    const std::vector<double> one{5.0};
    CHECK_THROWS_AS(mean_sd(one), NumericError);
}

TEST_CASE("ks oracle sanity: uniform sample passes, shifted sample fails") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> good(800), bad(800);
    for (std::size_t i = 0; i < good.size(); ++i) {
        good[i] = unif(rng);
        bad[i] = 0.5 * unif(rng);
    }
    CHECK(oracles::ks_uniform_pvalue(good) > 0.01);
    CHECK(oracles::ks_uniform_pvalue(bad) < 1e-6);
}
