#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "qf/verify.hpp"

using namespace qf;
using Catch::Approx;

namespace {

struct WorkerEnvGuard {
    explicit WorkerEnvGuard(const char* value) { setenv("QF_WORKERS", value, 1); }
    ~WorkerEnvGuard() { unsetenv("QF_WORKERS"); }
};

}  // namespace

TEST_CASE("geodesic spheres pass every comparison as numerical equality", "[verify]") {
    for (int n : {2, 3, 4}) {
        for (double rho0 : {pi / 8.0, pi / 4.0, 3.0 * pi / 8.0}) {
            CAPTURE(n, rho0);
            const auto rep =
                verify_inequalities(ShapeSpec{rho0, 0.0, 2}, GridMode::axisym, n, 64);
            REQUIRE(rep.hypothesis_ok);
            REQUIRE(rep.status() == "pass");
            REQUIRE(rep.all_pass());
            // one pair row per k in 2..n-1, n volume rows, one squared-Minkowski row
            REQUIRE(rep.rows.size() == static_cast<std::size_t>(2 * n - 1));
            for (const auto& row : rep.rows) {
                CAPTURE(row.name, row.rel);
                CHECK(row.has_verdict);
                CHECK(row.pass);
                CHECK(std::abs(row.rel) <= 1e-8);
                CHECK(row.note == "equality (numerical)");
            }
        }
    }
}

TEST_CASE("report rows carry stable names and the equator scales", "[verify]") {
    const auto rep = verify_inequalities(ShapeSpec{0.7, 0.0, 2}, GridMode::axisym, 3, 48);
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0].name == "A_2 >= xi_{2,0}(A_0)");
    CHECK(rep.rows[1].name == "A_0 >= xi_{0,-1}(A_{-1})");
    CHECK(rep.rows[2].name == "A_1 >= xi_{1,-1}(A_{-1})");
    CHECK(rep.rows[3].name == "A_2 >= xi_{2,-1}(A_{-1})");
    CHECK(rep.rows[4].name == "(int sigma_1 dmu)^2 >= Xi(A_0^2)");
    CHECK(rep.rows[0].scale == Approx(s_k(3, 2)).epsilon(1e-14));
    CHECK(rep.rows[1].scale == Approx(s_k(3, 0)).epsilon(1e-14));
    const double s1 = s_k(3, 1);
    CHECK(rep.rows[4].scale == Approx(s1 * s1).epsilon(1e-14));
    CHECK(rep.experiment == "n3-axisym-res48-geodesic_sphere-rho0.7");
    CHECK(rep.family == "geodesic_sphere");
}

TEST_CASE("perturbed spheres produce strictly positive gaps", "[verify]") {
    const auto rep =
        verify_inequalities(ShapeSpec{pi / 4.0, 0.1, 2}, GridMode::axisym, 2, 96);
    REQUIRE(rep.hypothesis_ok);
    REQUIRE(rep.status() == "pass");
    for (const auto& row : rep.rows) {
        CAPTURE(row.name, row.gap);
        CHECK(row.pass);
        CHECK(row.gap > 0.0);
        CHECK(row.note.empty());  // far from the equality band
    }
}

TEST_CASE("non-convex inputs are reported without a verdict", "[verify]") {
    // mean-convex but not convex: curvature dips negative near the pole
    const auto rep =
        verify_inequalities(ShapeSpec{1.1, 0.16, 2}, GridMode::axisym, 2, 96);
    CHECK(rep.min_kappa < 0.0);
    CHECK_FALSE(rep.hypothesis_ok);
    CHECK(rep.status() == "hypothesis violated");
    CHECK_FALSE(rep.all_pass());
    for (const auto& row : rep.rows) {
        CAPTURE(row.name);
        CHECK_FALSE(row.has_verdict);
        CHECK_FALSE(row.pass);
        CHECK(std::isfinite(row.gap));  // gaps are still informative
    }
}

TEST_CASE("custom graphs are labeled as such", "[verify]") {
    RadialGraph g = perturbed_sphere(build_grid(GridMode::axisym, 2, 48), 0.8, 0.03, 2);
    const auto rep = verify_inequalities(g);
    CHECK(rep.family == "custom");
    CHECK(rep.experiment == "n2-axisym-res48-custom");
    CHECK(std::isnan(rep.rho0));
    CHECK(rep.resolution == 48);
    CHECK(rep.hypothesis_ok);
}

TEST_CASE("reports are deterministic", "[verify]") {
    const ShapeSpec shape{pi / 4.0, 0.05, 2};
    const auto a = verify_inequalities(shape, GridMode::axisym, 3, 64);
    const auto b = verify_inequalities(shape, GridMode::axisym, 3, 64);
    REQUIRE(a.rows.size() == b.rows.size());
    CHECK(a.experiment == b.experiment);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].lhs == b.rows[i].lhs);  // bitwise, not approximate
        CHECK(a.rows[i].rhs == b.rows[i].rhs);
        CHECK(a.rows[i].gap == b.rows[i].gap);
    }
}

TEST_CASE("sweeps cover the family grid in a fixed order", "[verify]") {
    SECTION("empty family gives an empty result") {
        const auto out = sweep(SweepSpec{});
        CHECK(out.reports.empty());
        CHECK(out.summary.total == 0);
        CHECK(out.summary.all_pass());
    }

    SECTION("two-point family gives two reports plus tallies") {
        SweepSpec spec;
        spec.n_list = {2};
        spec.rho0_list = {pi / 4.0};
        spec.eps_list = {0.0, 0.05};
        spec.ell_list = {2};
        spec.resolutions = {48};
        const auto out = sweep(spec);
        REQUIRE(out.reports.size() == 2);
        CHECK(out.reports[0].family == "geodesic_sphere");
        CHECK(out.reports[1].family == "perturbed_sphere");
        CHECK(out.reports[1].eps == 0.05);
        CHECK(out.summary.total == 2);
        CHECK(out.summary.passed == 2);
        CHECK(out.summary.all_pass());
    }

    SECTION("failures are recorded and the sweep continues") {
        SweepSpec spec;
        spec.n_list = {2};
        spec.rho0_list = {2.0, pi / 4.0};  // 2.0 is outside the hemisphere
        spec.eps_list = {0.0};
        spec.ell_list = {2};
        spec.resolutions = {48};
        const auto out = sweep(spec);
        REQUIRE(out.reports.size() == 2);
        CHECK(out.reports[0].status() == "error");
        CHECK_FALSE(out.reports[0].error.empty());
        CHECK(out.reports[1].status() == "pass");
        CHECK(out.summary.errors == 1);
        CHECK(out.summary.passed == 1);
        CHECK_FALSE(out.summary.all_pass());
    }

    SECTION("worker count does not change the result") {
        SweepSpec spec;
        spec.n_list = {2, 3};
        spec.rho0_list = {0.7};
        spec.eps_list = {0.0, 0.04};
        spec.ell_list = {2};
        spec.resolutions = {48};

        SweepResult serial, parallel;
        {
            WorkerEnvGuard guard("1");
            serial = sweep(spec);
        }
        {
            WorkerEnvGuard guard("4");
            parallel = sweep(spec);
        }
        REQUIRE(serial.reports.size() == parallel.reports.size());
        for (std::size_t i = 0; i < serial.reports.size(); ++i) {
            CHECK(serial.reports[i].experiment == parallel.reports[i].experiment);
            REQUIRE(serial.reports[i].rows.size() == parallel.reports[i].rows.size());
            for (std::size_t r = 0; r < serial.reports[i].rows.size(); ++r)
                CHECK(serial.reports[i].rows[r].gap == parallel.reports[i].rows[r].gap);
        }
    }
}

TEST_CASE("worker count honors the environment override", "[verify]") {
    {
        WorkerEnvGuard guard("3");
        CHECK(worker_count() == 3);
    }
    {
        WorkerEnvGuard guard("not-a-number");
        CHECK(worker_count() >= 1);
    }
    {
        WorkerEnvGuard guard("0");
        CHECK(worker_count() >= 1);
    }
}

TEST_CASE("refinement studies recover second order", "[verify]") {
    const std::vector<int> ladder{32, 64, 128};

    SECTION("Minkowski identity residual") {
        for (int k : {0, 1}) {
            StudyOptions opt;
            opt.index = k;
            const auto study =
                convergence_study(ConvergenceCheck::minkowski_residual, ladder, opt);
            CAPTURE(k, study.order);
            REQUIRE_FALSE(study.saturated);
            CHECK(study.order >= 1.8);
            CHECK(study.order <= 2.2);
            REQUIRE(study.rows.size() == 3);
            CHECK(study.rows[0].residual > study.rows[1].residual);
            CHECK(study.rows[1].residual > study.rows[2].residual);
            CHECK(std::isnan(study.rows[0].step_order));
            CHECK(study.rows[2].step_order == Approx(study.order).margin(0.4));
        }
    }

    SECTION("support gradient identity") {
        const auto study =
            convergence_study(ConvergenceCheck::support_gradient_residual, ladder);
        CAPTURE(study.order);
        REQUIRE_FALSE(study.saturated);
        CHECK(study.order >= 1.8);
        CHECK(study.order <= 2.2);
    }

    SECTION("traced quermassintegral rates") {
        StudyOptions opt;
        opt.index = 1;
        const auto study = convergence_study(ConvergenceCheck::rate_check, ladder, opt);
        CAPTURE(study.order);
        REQUIRE_FALSE(study.saturated);
        CHECK(study.order >= 1.8);
        CHECK(study.order <= 2.2);
    }

    SECTION("geodesic spheres saturate immediately") {
        StudyOptions opt;
        opt.shape = ShapeSpec{pi / 4.0, 0.0, 2};
        const auto study =
            convergence_study(ConvergenceCheck::minkowski_residual, ladder, opt);
        CHECK(study.saturated);
        CHECK(study.order_label() == "saturated");
    }

    SECTION("malformed ladders are rejected") {
        CHECK_THROWS_AS(convergence_study(ConvergenceCheck::minkowski_residual, {64}),
                        std::invalid_argument);
        CHECK_THROWS_AS(convergence_study(ConvergenceCheck::minkowski_residual, {32, 64}),
                        std::invalid_argument);
        CHECK_THROWS_AS(convergence_study(ConvergenceCheck::minkowski_residual, {32, 48, 96}),
                        std::invalid_argument);
    }
}

TEST_CASE("check names round-trip", "[verify]") {
    for (auto c : {ConvergenceCheck::minkowski_residual,
                   ConvergenceCheck::support_gradient_residual, ConvergenceCheck::rate_check})
        CHECK(convergence_check_from_name(convergence_check_name(c)) == c);
    CHECK_THROWS_AS(convergence_check_from_name("energy"), std::invalid_argument);
}

TEST_CASE("inequality gaps vanish quadratically at the sphere", "[verify]") {
    // Odd Legendre modes turn eps -> -eps into a reflection of the same shape, so the
    // gap is even in eps and the eps^3 term drops out of the fit. Even modes carry a
    // genuine cubic that pushes the fitted slope up to ~2.16 over this ladder.
    const std::vector<double> eps{0.02, 0.04, 0.08, 0.16};
    for (int n : {2, 3}) {
        CAPTURE(n);
        const auto study = rigidity_sweep(n, GridMode::axisym, 96, pi / 4.0, 3, eps);
        REQUIRE(study.families.size() == static_cast<std::size_t>(2 * n - 1));
        for (const auto& fam : study.families) {
            CAPTURE(fam.name, fam.slope);
            CHECK(fam.positive);
            CHECK(fam.slope == Approx(2.0).margin(0.1));
        }
    }

    CHECK_THROWS_AS(rigidity_sweep(2, GridMode::axisym, 48, pi / 4.0, 2, {0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(rigidity_sweep(2, GridMode::axisym, 48, pi / 4.0, 2, {0.1, -0.2}),
                    std::invalid_argument);
}
