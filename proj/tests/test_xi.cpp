#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qf/xi.hpp"

using namespace qf;
using Catch::Approx;

namespace {

double rel(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace

TEST_CASE("squared-Minkowski closed form", "[xi]") {
    // n=2 at the quarter ball: (int sigma_1)^2 = (4 pi)^2
    CHECK(xi_closed_minkowski_sq(2, 4.0 * pi * pi) == Approx(16.0 * pi * pi).epsilon(1e-13));

    for (int n : {2, 3, 4, 5}) {
        const double N = sphere_measure(n);
        // vanishes at the equator endpoint
        CHECK(std::abs(xi_closed_minkowski_sq(n, N * N)) <= 1e-10 * n * n * N * N);
        // first-order relation with the analytic derivative
        for (int i = 1; i <= 1000; ++i) {
            double s = N * N * i / 1001.0;
            double val = xi_closed_minkowski_sq(n, s);
            double prime = xi_closed_minkowski_sq_prime(n, s);
            double res = 2.0 * (n - 1.0) / n * val - (2.0 * n + 2.0 * prime) * s;
            if (std::abs(res) > 1e-9 * n * n * s) {
                CAPTURE(n, s, res);
                CHECK(std::abs(res) <= 1e-9 * n * n * s);
            }
        }
        CHECK_THROWS_AS(xi_closed_minkowski_sq(n, 0.0), std::domain_error);
        CHECK_THROWS_AS(xi_closed_minkowski_sq(n, -1.0), std::domain_error);
        CHECK_THROWS_AS(xi_closed_minkowski_sq(n, N * N * 1.0001), std::domain_error);
    }
}

TEST_CASE("area-to-A2 closed form", "[xi]") {
    // n=3 at the equator: A_2(B_{pi/2}) = 4 pi^2
    CHECK(xi_closed_20(3, 2.0 * pi * pi) == Approx(4.0 * pi * pi).epsilon(1e-12));
    CHECK_THROWS_AS(xi_closed_20(2, 1.0), std::domain_error);

    for (int n : {3, 4, 5}) {
        const double N = sphere_measure(n);
        const double lead = 0.5 * n * (n - 1) * std::pow(N, 2.0 / n);

        // leading small-area behavior; the linear term decays like s^{2/n}, so
        // the sample point has to shrink with n to isolate the power term
        double s = N * std::pow(10.0, -5.0 * n);
        CHECK(xi_closed_20(n, s) / std::pow(s, (n - 2.0) / n) == Approx(lead).epsilon(1e-9));

        // factored first-order relation with the analytic derivative
        for (int i = 1; i <= 1000; ++i) {
            double x = N * i / 1001.0;
            double val = xi_closed_20(n, x);
            double prime = xi_closed_20_prime(n, x);
            double res = prime - (n - 2.0) * (val - (n - 1.0) * x) / (n * x);
            CHECK(std::abs(res) <= 1e-9 * std::max(1.0, std::abs(prime)));
        }

        // The same relation with the (n-2) factor applied to the xi term only,
        // i.e. ((n-2) xi - (n-1) s)/(n s), misses by exactly (n-1)(n-3)/n for the
        // function traced out by the sphere family. Both groupings coincide at
        // n=3, which is why single-dimension checks cannot tell them apart.
        double x = 0.5 * N;
        double val = xi_closed_20(n, x);
        double prime = xi_closed_20_prime(n, x);
        double res_other = prime - ((n - 2.0) * val - (n - 1.0) * x) / (n * x);
        CHECK(res_other == Approx(-(n - 1.0) * (n - 3.0) / n).margin(1e-9));
    }
}

TEST_CASE("parametric tables reproduce the sphere family", "[xi]") {
    for (int n : {2, 3, 4}) {
        for (int k = 0; k <= n - 1; ++k) {
            for (int l = -1; l < k; ++l) {
                auto f = xi_parametric(n, k, l, 2000);
                REQUIRE(f.kind == XiKind::parametric);
                double scale = s_k(n, k);
                for (int i = 1; i <= 100; ++i) {
                    double rho = 0.02 + (pi / 2.0 - 0.04) * i / 101.0;
                    double want = sphere_quermass(n, rho, k);
                    double got = f.eval(sphere_quermass(n, rho, l));
                    CHECK(std::abs(want - got) <= 1e-9 * scale);
                }
            }
        }
    }
}

TEST_CASE("parametric evaluation near the domain ends", "[xi]") {
    auto f = xi_parametric(3, 2, 0, 2000);

    // below the lowest table knot the abscissa closed form is inverted directly
    double rho = 5e-4;
    double s = sphere_quermass(3, rho, 0);
    CHECK(rel(f.eval(s), sphere_quermass(3, rho, 2)) <= 1e-8);

    // approaching s_l the value approaches the hemisphere quermassintegral
    double top = s_k(3, 0);
    CHECK(rel(f.eval(top * (1.0 - 1e-10)), s_k(3, 2)) <= 1e-8);

    CHECK_THROWS_AS(f.eval(top + 1.0), std::domain_error);
    CHECK_THROWS_AS(f.eval(top), std::domain_error);
    CHECK_THROWS_AS(f.eval(0.0), std::domain_error);
    CHECK_THROWS_AS(f.eval(-5.0), std::domain_error);
}

TEST_CASE("parametric preconditions", "[xi]") {
    CHECK_THROWS_AS(xi_parametric(2, 1, 1, 2000), std::domain_error);
    CHECK_THROWS_AS(xi_parametric(3, 2, 0, 199), std::domain_error);
    CHECK_THROWS_AS(xi_parametric(3, 3, 1, 2000), std::domain_error);
    CHECK_THROWS_AS(xi_parametric(3, 0, -2, 2000), std::domain_error);
}

TEST_CASE("parametric table matches the closed form for n=3", "[xi]") {
    auto f = xi_parametric(3, 2, 0, 2000);
    const double N = sphere_measure(3);
    for (int i = 1; i <= 100; ++i) {
        double s = N * (0.02 + 0.96 * i / 101.0);
        CHECK(rel(f.eval(s), xi_closed_20(3, s)) <= 1e-8);
    }
}

TEST_CASE("three constructions of the area-to-A2 comparison agree", "[xi]") {
    for (int n : {3, 4}) {
        auto par = xi_parametric(n, 2, 0, 2000);
        auto ode = xi_ode_20(n);
        const double N = sphere_measure(n);
        for (int i = 0; i <= 200; ++i) {
            double s = N * (0.1 + 0.8 * i / 200.0);
            double closed = xi_closed_20(n, s);
            CHECK(rel(par.eval(s), closed) <= 1e-7);
            CHECK(rel(ode.eval(s), closed) <= 1e-7);
        }
    }
}

TEST_CASE("comparison functions are strictly increasing", "[xi]") {
    std::vector<XiFunction> fs;
    fs.push_back(xi_parametric(3, 2, 0, 2000));
    fs.push_back(xi_parametric(4, 3, 1, 2000));
    fs.push_back(xi_parametric(2, 1, -1, 2000));
    fs.push_back(xi_ode_20(3));
    fs.push_back(xi_closed_function(3, XiKind::closed_20));
    for (const auto& f : fs) {
        double prev = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            double s = f.domain_hi * (1e-3 + (1.0 - 2e-3) * i / 1000.0);
            double val = f.eval(s);
            CHECK(val > prev);
            prev = val;
        }
    }

    // The squared-Minkowski comparison is the one deliberate exception: it rises
    // from 0, peaks at ((n-1)/n)^n s_0^2, and returns to 0 at the equator, so it
    // is excluded from the monotone scan and from xi_inverse.
    for (int n : {2, 3}) {
        const double N = sphere_measure(n);
        double speak = std::pow((n - 1.0) / n, n) * N * N;
        CHECK(xi_closed_minkowski_sq(n, speak) > xi_closed_minkowski_sq(n, 0.1 * N * N));
        CHECK(xi_closed_minkowski_sq(n, speak) > xi_closed_minkowski_sq(n, 0.9 * N * N));
    }
}

TEST_CASE("first-order relation holds on parametric tables for k=4", "[xi]") {
    for (int n : {5, 6}) {
        auto fk = xi_parametric(n, 4, 2, 2000);
        auto fkm2 = xi_parametric(n, 2, 0, 2000);
        double hi = s_k(n, 2);
        for (int i = 0; i <= 100; ++i) {
            double s = hi * (0.1 + 0.8 * i / 100.0);
            double h = 1e-6 * s;
            double numder = (fk.eval(s + h) - fk.eval(s - h)) / (2.0 * h);
            double res = xi_ode_residual(n, 4, fk, fkm2, s);
            CHECK(std::abs(res) <= 1e-5 * std::max(std::abs(numder), 1e-3));
        }
    }
}

TEST_CASE("the k=3 relation is refused, not guessed", "[xi]") {
    auto f31 = xi_parametric(4, 3, 1, 2000);
    auto f1m1 = xi_parametric(4, 1, -1, 2000);
    CHECK_THROWS_AS(xi_ode_residual(4, 3, f31, f1m1, 1.0), unsupported_formula_error);
}

TEST_CASE("xi_inverse", "[xi]") {
    auto f = xi_parametric(3, 2, 0, 2000);
    for (int i = 1; i <= 50; ++i) {
        double s = f.domain_hi * (0.05 + 0.9 * i / 51.0);
        CHECK(xi_inverse(f, f.eval(s)) == Approx(s).epsilon(1e-10));
    }

    auto closed = xi_closed_function(3, XiKind::closed_20);
    CHECK(xi_inverse(closed, 4.0 * pi * pi) == Approx(2.0 * pi * pi).epsilon(1e-10));
    double mid = 0.5 * sphere_measure(3);
    CHECK(xi_inverse(closed, xi_closed_20(3, mid)) == Approx(mid).epsilon(1e-10));

    CHECK_THROWS_AS(xi_inverse(f, 0.0), std::domain_error);
    CHECK_THROWS_AS(xi_inverse(f, -1.0), std::domain_error);
    CHECK_THROWS_AS(xi_inverse(f, s_k(3, 2) + 1.0), std::domain_error);
    CHECK_THROWS_AS(xi_inverse(xi_closed_function(3, XiKind::closed_minkowski_sq), 1.0),
                    std::domain_error);
}
