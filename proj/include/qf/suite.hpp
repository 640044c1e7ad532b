#pragma once

// Release gate: one self-contained battery that exercises every module against
// its oracle at pinned resolutions and tolerances. Each criterion reports a
// single pass/fail verdict plus a one-line metric summary; the CLI `suite`
// command and the acceptance binary are thin wrappers around run_acceptance_suite.
//
// Tolerances live here, in code, next to the check they gate. The optional
// tolerance_scale knob loosens or tightens all of them uniformly for
// exploratory runs; time budgets are never scaled.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/flow.hpp"
#include "qf/verify.hpp"

namespace qf {

struct CriterionInfo {
    int id = 0;
    const char* title = "";
    double budget_seconds = 0.0;
};

inline const std::array<CriterionInfo, 10>& acceptance_criteria() {
    static const std::array<CriterionInfo, 10> table = {{
        {1, "sphere quermassintegral oracle", 30.0},
        {2, "closed-form comparison identities", 1.0},
        {3, "area-to-A2 constructions agree", 30.0},
        {4, "first-order relation at k=4", 60.0},
        {5, "Minkowski identity convergence", 120.0},
        {6, "sphere flow scalar reduction", 60.0},
        {7, "inequality gaps decay monotonically", 300.0},
        {8, "constrained flow conservation", 180.0},
        {9, "inequality battery and rigidity", 300.0},
        {10, "grid cross-check on zonal shapes", 30.0},
    }};
    return table;
}

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteOptions {
    double tolerance_scale = 1.0;
    std::vector<int> only;  // criterion ids to run; empty runs all ten
};

struct SuiteReport {
    std::vector<CriterionResult> results;
    double total_seconds = 0.0;
    bool all_pass() const {
        if (results.empty()) return false;
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

namespace detail {

struct Outcome {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
inline std::string sfmt(const char* fmt, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return std::string(buf);
}

inline double rel_gap(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// 1. Discrete quermassintegrals of geodesic spheres against the closed forms,
// at the resolutions the battery ships with.
inline Outcome sphere_oracle(double ts) {
    const double tol = 1e-9 * ts;
    double worst = 0.0;
    int wn = 0, wk = 0;
    for (int n : {2, 3, 4}) {
        const RoundGrid grid = n == 2 ? build_grid(GridMode::full2d, 2, 128)
                                      : build_grid(GridMode::axisym, n, 2048);
        for (double rho : {pi / 8.0, pi / 4.0, 3.0 * pi / 8.0}) {
            const QuermassVector q = quermass_vector(compute_geometry(geodesic_sphere(grid, rho)));
            for (int k = -1; k <= n - 1; ++k) {
                const double want = sphere_quermass(n, rho, k);
                const double r = std::abs(q.a(k) - want) / std::abs(want);
                if (r > worst) {
                    worst = r;
                    wn = n;
                    wk = k;
                }
            }
        }
    }
    return {worst <= tol, sfmt("worst rel %.2e at n=%d k=%d (limit %.1e)", worst, wn, wk, tol)};
}

// 2. The two closed-form comparison functions against their defining first-order
// relations, plus the hand-checked quarter-ball and equator values.
inline Outcome closed_form_identities(double ts) {
    const double tol = 1e-9 * ts;
    const double worked_tol = 1e-12 * ts;
    double worst_mink = 0.0;
    for (int n : {2, 3, 4, 5}) {
        const double N = sphere_measure(n);
        for (int i = 1; i <= 1000; ++i) {
            const double s = N * N * i / 1001.0;
            const double val = xi_closed_minkowski_sq(n, s);
            const double prime = xi_closed_minkowski_sq_prime(n, s);
            const double res = 2.0 * (n - 1.0) / n * val - (2.0 * n + 2.0 * prime) * s;
            worst_mink = std::max(worst_mink, std::abs(res) / (n * n * s));
        }
    }
    double worst_20 = 0.0;
    for (int n : {3, 4, 5}) {
        const double N = sphere_measure(n);
        for (int i = 1; i <= 1000; ++i) {
            const double x = N * i / 1001.0;
            const double val = xi_closed_20(n, x);
            const double prime = xi_closed_20_prime(n, x);
            const double res = prime - (n - 2.0) * (val - (n - 1.0) * x) / (n * x);
            worst_20 = std::max(worst_20, std::abs(res) / std::max(1.0, std::abs(prime)));
        }
    }
    const double quarter =
        std::abs(xi_closed_minkowski_sq(2, 4.0 * pi * pi) - 16.0 * pi * pi) / (16.0 * pi * pi);
    const double equator =
        std::abs(xi_closed_20(3, 2.0 * pi * pi) - 4.0 * pi * pi) / (4.0 * pi * pi);
    const bool ok = worst_mink <= tol && worst_20 <= tol && quarter <= worked_tol
                    && equator <= worked_tol;
    return {ok, sfmt("relation residuals %.2e / %.2e (limit %.1e), worked values %.1e / %.1e",
                     worst_mink, worst_20, tol, quarter, equator)};
}

// 3. Closed form, sphere-family parametric table, and direct ODE integration of
// the area-to-A2 comparison, on the middle 80% of the domain.
inline Outcome agreement_20(double ts) {
    const double tol = 1e-7 * ts;
    double worst = 0.0;
    int wn = 0;
    for (int n : {3, 4, 5}) {
        const XiFunction par = xi_parametric(n, 2, 0, 2000);
        const XiFunction ode = xi_ode_20(n);
        const double N = sphere_measure(n);
        for (int i = 0; i <= 200; ++i) {
            const double s = N * (0.1 + 0.8 * i / 200.0);
            const double closed = xi_closed_20(n, s);
            const double r = std::max(rel_gap(par.eval(s), closed), rel_gap(ode.eval(s), closed));
            if (r > worst) {
                worst = r;
                wn = n;
            }
        }
    }
    return {worst <= tol, sfmt("worst rel %.2e at n=%d (limit %.1e)", worst, wn, tol)};
}

// 4. The printed first-order relation for the k=4 comparison, evaluated on
// parametric tables with a central-difference derivative as reference scale.
inline Outcome k4_relation(double ts) {
    const double tol = 1e-5 * ts;
    double worst = 0.0;
    int wn = 0;
    for (int n : {5, 6}) {
        const XiFunction fk = xi_parametric(n, 4, 2, 2000);
        const XiFunction fkm2 = xi_parametric(n, 2, 0, 2000);
        const double hi = s_k(n, 2);
        for (int i = 0; i <= 100; ++i) {
            const double s = hi * (0.1 + 0.8 * i / 100.0);
            const double h = 1e-6 * s;
            const double numder = (fk.eval(s + h) - fk.eval(s - h)) / (2.0 * h);
            const double r = std::abs(xi_ode_residual(n, 4, fk, fkm2, s))
                             / std::max(std::abs(numder), 1e-3);
            if (r > worst) {
                worst = r;
                wn = n;
            }
        }
    }
    return {worst <= tol, sfmt("worst scaled residual %.2e at n=%d (limit %.1e)", worst, wn, tol)};
}

// 5. Minkowski identity quadrature on a perturbed sphere: small residual at the
// finest grid and second-order decay across three doublings, every valid k.
inline Outcome minkowski_convergence(double ts) {
    const double tol = 1e-6 * ts;
    const double min_order = 1.8;
    double worst_rel = 0.0, worst_order = 1e300;
    int wn = 0, wk = 0;
    for (int n : {2, 3, 4}) {
        for (int k = 0; k <= n - 1; ++k) {
            std::vector<double> rels;
            for (int res : {256, 512, 1024, 2048}) {
                const GeometryFields f = compute_geometry(
                    perturbed_sphere(build_grid(GridMode::axisym, n, res), pi / 4.0, 0.05, 2));
                double rhs = 0.0;
                for (std::size_t i = 0; i < f.nodes; ++i)
                    rhs += f.phip[i] * f.sig_at(i, k) * f.dmu[i];
                rels.push_back(std::abs(minkowski_residual(f, k) / ((n - k) * rhs)));
            }
            if (rels.back() > worst_rel) {
                worst_rel = rels.back();
                wn = n;
                wk = k;
            }
            for (std::size_t i = 0; i + 1 < rels.size(); ++i)
                worst_order = std::min(worst_order, std::log2(rels[i] / rels[i + 1]));
        }
    }
    const bool ok = worst_rel <= tol && worst_order >= min_order;
    return {ok, sfmt("worst rel %.2e at n=%d k=%d (limit %.1e), min order %.2f (need %.1f)",
                     worst_rel, wn, wk, tol, worst_order, min_order)};
}

// 6. A geodesic sphere under the expanding k=1 flow reduces to a scalar ODE with
// the exact solution sin(rho(t)) = sin(rho0) e^{t/2}; fixed-step integration must
// track it pointwise, and the adaptive driver must reach the equator at 2 ln 2.
inline Outcome sphere_flow_reduction(double ts) {
    const double state_tol = 1e-6 * ts;
    const double time_tol = 5e-2 * ts;
    FlowSpec spec;
    spec.law = FlowLaw::gerhardt;
    spec.k = 1;
    RadialGraph g = geodesic_sphere(build_grid(GridMode::axisym, 2, 24), pi / 6.0);
    double state_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        g = flow_step(g, spec, 1e-3);
        const double want = std::asin(std::sin(pi / 6.0) * std::exp(0.5e-3 * (i + 1)));
        for (double r : g.rho) state_err = std::max(state_err, std::abs(r - want));
    }
    FlowSpec run = spec;
    run.dt_max = 5e-3;
    run.equator_tol = 1e-3;
    run.t_max = 5.0;
    run.record_interval = 0.01;
    const FlowTrace tr =
        flow_run(geodesic_sphere(build_grid(GridMode::axisym, 2, 32), pi / 6.0), run);
    const double t_star = tr.records.back().t;
    const double time_err = std::abs(t_star - 2.0 * std::log(2.0));
    const bool ok = state_err <= state_tol && tr.stop_reason == "equator" && time_err <= time_tol;
    return {ok, sfmt("state err %.2e (limit %.1e), equator at t=%.4f vs 2ln2 (err %.1e)",
                     state_err, state_tol, t_star, time_err)};
}

// 7. The exponentially weighted inequality gaps along expanding flows from convex
// perturbed spheres: no recorded step may rise above the noise floor and the gap
// must have collapsed by the time the flow reaches the equator. Recording every
// accepted step makes this the strictest monotonicity statement the discrete
// trajectory can pass.
inline Outcome gap_monotonicity(double ts) {
    const double step_tol = 1e-7 * ts;
    const double final_tol = 1e-3 * ts;
    struct Run {
        GridMode mode;
        int n, k, res;
        MonitorSpec mon;
    };
    const Run runs[] = {
        {GridMode::full2d, 2, 1, 64, {MonitorSpec::minkowski_sq, 0}},
        {GridMode::axisym, 3, 2, 256, {MonitorSpec::pair, 2}},
        {GridMode::axisym, 4, 3, 256, {MonitorSpec::pair, 3}},
    };
    double worst_step = 0.0, worst_final = 0.0;
    int wn = 0;
    for (const Run& r : runs) {
        FlowSpec fs;
        fs.law = FlowLaw::gerhardt;
        fs.k = r.k;
        fs.record_interval = 0.0;
        fs.equator_tol = 1e-3;
        fs.t_max = 50.0;
        const RadialGraph g0 =
            perturbed_sphere(build_grid(r.mode, r.n, r.res), pi / 4.0, 0.1, 2);
        const FlowTrace tr = flow_run(g0, fs, {r.mon});
        const double q0 = std::abs(tr.records.front().monitors[0]);
        double up = 0.0;
        for (std::size_t i = 1; i < tr.records.size(); ++i)
            up = std::max(up, tr.records[i].monitors[0] - tr.records[i - 1].monitors[0]);
        const double fin = std::abs(tr.records.back().monitors[0]);
        if (up / q0 > worst_step) {
            worst_step = up / q0;
            wn = r.n;
        }
        worst_final = std::max(worst_final, fin / q0);
        if (tr.stop_reason != "equator")
            return {false, sfmt("n=%d stopped early: %s", r.n, tr.stop_reason.c_str())};
    }
    const bool ok = worst_step <= step_tol && worst_final <= final_tol;
    return {ok, sfmt("worst step %.2e of Q0 at n=%d (limit %.1e), worst final %.2e (limit %.1e)",
                     worst_step, wn, step_tol, worst_final, final_tol)};
}

// 8. The volume-preserving flow: volume must hold to time-stepper accuracy, every
// quermassintegral must be nonincreasing step by step, and the speed must be
// uniformly below the stationarity threshold well before the time horizon.
inline Outcome constrained_conservation(double ts) {
    const double tol = 1e-7 * ts;
    const double speed_tol = 1e-6 * ts;
    double worst_drift = 0.0, worst_up = 0.0, worst_speed = 0.0, last_t = 0.0;
    for (int n : {2, 3}) {
        FlowSpec fs;
        fs.law = FlowLaw::cgls0;
        fs.dt_max = 1e-2;
        fs.t_max = 20.0;
        fs.stationarity_tol = speed_tol;
        fs.record_interval = 0.0;
        const RadialGraph g0 =
            perturbed_sphere(build_grid(GridMode::axisym, n, 128), pi / 4.0, 0.05, 2);
        const FlowTrace tr = flow_run(g0, fs);
        if (tr.stop_reason != "stationary")
            return {false, sfmt("n=%d stopped as %s, not stationary", n, tr.stop_reason.c_str())};
        const double vol0 = tr.records.front().q.a(-1);
        for (const auto& rec : tr.records)
            worst_drift = std::max(worst_drift, std::abs(rec.q.a(-1) - vol0) / vol0);
        for (int m = 0; m <= n - 1; ++m) {
            const double scale = std::abs(tr.records.front().q.a(m));
            for (std::size_t i = 1; i < tr.records.size(); ++i)
                worst_up = std::max(
                    worst_up, (tr.records[i].q.a(m) - tr.records[i - 1].q.a(m)) / scale);
        }
        worst_speed = std::max(worst_speed, tr.records.back().max_speed);
        last_t = std::max(last_t, tr.records.back().t);
    }
    const bool ok = worst_drift <= tol && worst_up <= tol && worst_speed < speed_tol
                    && last_t <= 20.0;
    return {ok, sfmt("volume drift %.2e, worst A_m step %.2e (limit %.1e), stationary by t=%.2f",
                     worst_drift, worst_up, tol, last_t)};
}

// 9. The full report battery: geodesic spheres must pass every row as numerical
// equality, and along a perturbation family the gaps must be strictly positive
// with the quadratic pinch of the rigidity statement, family by family.
inline Outcome battery_and_rigidity(double ts) {
    EnvironmentStamp env;
    env.pass_tol = 1e-8 * ts;
    int sphere_fail = 0;
    for (int n : {2, 3, 4}) {
        for (double rho : {pi / 8.0, pi / 4.0, 3.0 * pi / 8.0}) {
            ShapeSpec shape;
            shape.rho0 = rho;
            const VerificationReport rep =
                verify_inequalities(shape, GridMode::axisym, n, 96, env);
            if (!rep.all_pass()) ++sphere_fail;
        }
    }
    const double slope_tol = 0.1 * ts;
    double worst_dev = 0.0;
    int wn = 0;
    bool all_positive = true;
    for (int n : {2, 3}) {
        const RigidityStudy st = rigidity_sweep(n, GridMode::axisym, 128, pi / 4.0, 3,
                                                {0.02, 0.04, 0.08, 0.16}, env);
        for (const auto& fam : st.families) {
            all_positive = all_positive && fam.positive;
            const double dev = std::abs(fam.slope - 2.0);
            if (fam.positive && dev > worst_dev) {
                worst_dev = dev;
                wn = n;
            }
        }
    }
    const bool ok = sphere_fail == 0 && all_positive && worst_dev <= slope_tol;
    return {ok, sfmt("%d sphere failures, gaps %s, worst slope dev %.3f at n=%d (limit %.2f)",
                     sphere_fail, all_positive ? "positive" : "NOT positive", worst_dev, wn,
                     slope_tol)};
}

// 10. The axisymmetric reduction against the full grid on shapes both can
// represent: geodesic spheres and zonal perturbations share their meridian nodes,
// so every integrated quantity must agree to rounding, not merely to truncation.
inline Outcome grid_cross_check(double ts) {
    const double tol = 1e-8 * ts;
    const int res = 64;
    const RoundGrid ga = build_grid(GridMode::axisym, 2, res);
    const RoundGrid gf = build_grid(GridMode::full2d, 2, res);
    double worst = 0.0;
    const auto compare = [&](double rho0, double eps, int ell) {
        RadialGraph a = geodesic_sphere(ga, rho0);
        RadialGraph f = geodesic_sphere(gf, rho0);
        for (std::size_t i = 0; i < a.rho.size(); ++i)
            a.rho[i] += eps * legendre_p(ell, std::cos(ga.node_theta(i)));
        for (std::size_t i = 0; i < f.rho.size(); ++i)
            f.rho[i] += eps * legendre_p(ell, std::cos(gf.node_theta(i)));
        const GeometryFields fa = compute_geometry(a);
        const GeometryFields ff = compute_geometry(f);
        const QuermassVector qa = quermass_vector(fa);
        const QuermassVector qf = quermass_vector(ff);
        for (int k = -1; k <= 1; ++k)
            worst = std::max(worst, std::abs(qa.a(k) - qf.a(k)) / std::abs(qa.a(k)));
        for (int m = 0; m <= 2; ++m) {
            double sa = 0.0, sf = 0.0;
            for (std::size_t i = 0; i < fa.nodes; ++i) sa += fa.sig_at(i, m) * fa.dmu[i];
            for (std::size_t i = 0; i < ff.nodes; ++i) sf += ff.sig_at(i, m) * ff.dmu[i];
            worst = std::max(worst, std::abs(sa - sf) / std::max(std::abs(sa), 1e-30));
        }
    };
    for (double rho : {pi / 8.0, pi / 4.0, 3.0 * pi / 8.0}) compare(rho, 0.0, 2);
    compare(pi / 4.0, 0.05, 2);
    compare(pi / 4.0, 0.03, 3);
    return {worst <= tol, sfmt("worst rel %.2e across 5 shapes (limit %.1e)", worst, tol)};
}

inline Outcome run_one(int id, double ts) {
    switch (id) {
        case 1: return sphere_oracle(ts);
        case 2: return closed_form_identities(ts);
        case 3: return agreement_20(ts);
        case 4: return k4_relation(ts);
        case 5: return minkowski_convergence(ts);
        case 6: return sphere_flow_reduction(ts);
        case 7: return gap_monotonicity(ts);
        case 8: return constrained_conservation(ts);
        case 9: return battery_and_rigidity(ts);
        case 10: return grid_cross_check(ts);
        default: throw std::invalid_argument("unknown criterion id " + std::to_string(id));
    }
}

} // namespace detail

using SuiteProgress = std::function<void(const CriterionResult&)>;

inline SuiteReport run_acceptance_suite(const SuiteOptions& opt = {},
                                        const SuiteProgress& progress = {}) {
    SuiteReport report;
    for (const CriterionInfo& info : acceptance_criteria()) {
        if (!opt.only.empty()
            && std::find(opt.only.begin(), opt.only.end(), info.id) == opt.only.end())
            continue;
        CriterionResult r;
        r.id = info.id;
        r.title = info.title;
        const auto t0 = std::chrono::steady_clock::now();
        detail::Outcome oc;
        try {
            oc = detail::run_one(info.id, opt.tolerance_scale);
        } catch (const std::exception& e) {
            oc = {false, std::string("exception: ") + e.what()};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.pass = oc.pass;
        r.detail = oc.detail;
        if (r.seconds > info.budget_seconds) {
            r.pass = false;
            r.detail += detail::sfmt(" [over %.0fs budget]", info.budget_seconds);
        }
        report.total_seconds += r.seconds;
        report.results.push_back(r);
        if (progress) progress(report.results.back());
    }
    return report;
}

} // namespace qf
