#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "n400/special.hpp"
#include "n400/stats.hpp"
#include "n400/util.hpp"
#include "support/oracles.hpp"

using namespace n400;

TEST_CASE("chi_square_sf agrees with quadrature over the working range") {
    for (double df : {1.0, 2.0, 3.0, 5.0, 10.0, 25.0, 50.0}) {
        for (double x : {0.01, 0.5, 1.0, 3.841459, 11.0705, 40.0, 120.0, 200.0}) {
            const double got = chi_square_sf(x, df);
            const double want = oracles::chi2_sf_quadrature(x, df);
            CAPTURE(df);
            CAPTURE(x);
            CHECK(std::fabs(got - want) <= 1e-10);
        }
    }
}

TEST_CASE("chi_square_sf fixed points") {
    CHECK(chi_square_sf(0.0, 1.0) == 1.0);
    CHECK(chi_square_sf(3.841459, 1.0) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(chi_square_sf(11.0705, 5.0) == doctest::Approx(0.05).epsilon(1e-4));
    // monotone tail limit
    double prev = 1.0;
    for (double x = 0.0; x <= 300.0; x += 10.0) {
        const double v = chi_square_sf(x, 4.0);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.0);
        prev = v;
    }
    CHECK(chi_square_sf(300.0, 4.0) < 1e-50);
}

TEST_CASE("chi_square_sf rejects bad arguments") {
    CHECK_THROWS_AS(chi_square_sf(-1.0, 1.0), NumericError);
    CHECK_THROWS_AS(chi_square_sf(1.0, 0.0), NumericError);
}

TEST_CASE("t_sf agrees with quadrature") {
    for (double df : {1.0, 2.0, 4.0, 10.0, 100.0, 1000.0}) {
        for (double t : {-4.0, -1.5, 0.0, 0.3, 1.0, 2.776445, 6.0}) {
            const double got = t_sf(t, df);
            const double want = oracles::t_sf_quadrature(t, df);
            CAPTURE(df);
            CAPTURE(t);
            CHECK(std::fabs(got - want) <= 1e-10);
        }
    }
}

TEST_CASE("t_sf fixed points and the normal limit") {
    CHECK(t_sf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t_sf(2.776445, 4.0) == doctest::Approx(0.025).epsilon(1e-5));

    // large-df convergence to the normal upper tail
    const double z = 1.959964;
    const double target = oracles::normal_sf(z);
    double prev_gap = 1.0;
    for (double df : {1e2, 1e3, 1e4, 1e5}) {
        const double gap = std::fabs(t_sf(z, df) - target);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(std::fabs(t_sf(z, 1e5) - target) < 2e-6);
    CHECK(t_sf(z, 1e5) == doctest::Approx(0.025).epsilon(1e-3));
}

TEST_CASE("t_sf symmetry") {
    for (double t : {0.1, 0.9, 2.3, 5.0})
        CHECK(t_sf(t, 6.0) + t_sf(-t, 6.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("t_sf is monotone nonincreasing and stays in [0,1]") {
    for (double df : {1.0, 4.0, 60.0}) {
        double prev = 1.0;
        for (double t = -8.0; t <= 8.0; t += 0.25) {
            const double v = t_sf(t, df);
            CHECK(v <= prev + 1e-14);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("incomplete gamma and beta edge values") {
    CHECK(special::gamma_p(2.0, 0.0) == 0.0);
    CHECK(special::gamma_q(2.0, 0.0) == 1.0);
    CHECK(special::gamma_p(1.5, 1.0) + special::gamma_q(1.5, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(special::incbeta(2.0, 3.0, 0.0) == 0.0);
    CHECK(special::incbeta(2.0, 3.0, 1.0) == 1.0);
    // symmetric relation I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(special::incbeta(2.5, 0.5, 0.3) ==
          doctest::Approx(1.0 - special::incbeta(0.5, 2.5, 0.7)).epsilon(1e-12));
}
