#pragma once

// Experiment harness: evaluates the sharp quermassintegral comparisons on concrete
// shapes, sweeps shape families, and runs grid-refinement studies. Reports are plain
// data and deterministic: fixed summation order, no clocks, no global state.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flow.hpp"
#include "quermass.hpp"
#include "surface.hpp"
#include "xi.hpp"

namespace qf {

namespace detail {

// Run work(0..count-1) on up to worker_count() threads. Unlike parallel_for this
// hands out single indices, because one experiment can cost far more than another.
// Each index owns its output slot, so results are identical to the sequential
// order regardless of scheduling.
inline void run_indexed(std::size_t count, const std::function<void(std::size_t)>& work) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) work(i);
        });
    for (auto& t : pool) t.join();
}

inline std::string fmt_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace detail

// Shape families the harness can build on demand. eps == 0 is the geodesic sphere
// (ell is then irrelevant but kept so sweep specs stay rectangular).
struct ShapeSpec {
    double rho0 = pi / 4.0;
    double eps = 0.0;
    int ell = 2;

    bool is_sphere() const { return eps == 0.0; }
    const char* family() const { return is_sphere() ? "geodesic_sphere" : "perturbed_sphere"; }
};

inline RadialGraph build_shape(const ShapeSpec& s, GridMode mode, int n, int resolution) {
    RoundGrid grid = build_grid(mode, n, resolution);
    return s.is_sphere() ? geodesic_sphere(grid, s.rho0)
                         : perturbed_sphere(grid, s.rho0, s.eps, s.ell);
}

// Knobs stamped into every report so a reader can reproduce it without the CLI config.
struct EnvironmentStamp {
    std::uint64_t seed = 0;           // reserved: no stage uses randomness yet
    double pass_tol = 1e-8;           // pass means gap >= -pass_tol * scale
    double saturation_floor = 1e-13;  // residuals below this cannot support an order fit
    int xi_knots = 2000;              // knot count for comparison-function tables
};

struct InequalityRow {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;    // lhs - rhs
    double scale = 1.0;  // equator value of the left-hand functional
    double rel = 0.0;    // gap / scale
    bool has_verdict = false;  // false when the convexity hypothesis failed or the row errored
    bool pass = false;
    std::string note;  // "equality (numerical)", domain-error text, or empty
};

struct ConvergenceRow {
    int resolution = 0;
    double spacing = 0.0;
    double residual = 0.0;
    // order against the previous row; NaN on the first row
    double step_order = std::numeric_limits<double>::quiet_NaN();
};

struct VerificationReport {
    std::string experiment;
    int n = 0;
    GridMode mode = GridMode::axisym;
    int resolution = 0;
    std::string family = "custom";
    double rho0 = std::numeric_limits<double>::quiet_NaN();
    double eps = std::numeric_limits<double>::quiet_NaN();
    int ell = 0;
    double min_kappa = 0.0;
    bool hypothesis_ok = false;  // min principal curvature positive at every node
    std::vector<InequalityRow> rows;
    std::vector<ConvergenceRow> convergence;  // filled by refinement studies only
    EnvironmentStamp env;
    std::string error;  // non-empty when the experiment itself failed to run

    bool all_pass() const {
        if (!error.empty() || !hypothesis_ok || rows.empty()) return false;
        for (const auto& r : rows)
            if (!r.has_verdict || !r.pass) return false;
        return true;
    }
    std::string status() const {
        if (!error.empty()) return "error";
        if (!hypothesis_ok) return "hypothesis violated";
        return all_pass() ? "pass" : "fail";
    }
};

namespace detail {

inline std::string index_name(int k) {
    return k < 0 ? "A_{" + std::to_string(k) + "}" : "A_" + std::to_string(k);
}

inline std::string pair_row_name(int k, int l) {
    return index_name(k) + " >= xi_{" + std::to_string(k) + "," + std::to_string(l) + "}("
           + index_name(l) + ")";
}

inline InequalityRow scored_row(std::string name, double lhs, double rhs, double scale,
                                bool verdicts, double pass_tol) {
    InequalityRow row;
    row.name = std::move(name);
    row.lhs = lhs;
    row.rhs = rhs;
    row.gap = lhs - rhs;
    row.scale = scale;
    row.rel = row.gap / scale;
    row.has_verdict = verdicts;
    if (verdicts) {
        row.pass = row.gap >= -pass_tol * scale;
        if (std::abs(row.gap) <= pass_tol * scale) row.note = "equality (numerical)";
    }
    return row;
}

inline InequalityRow errored_row(std::string name, double lhs, double scale, const char* what) {
    InequalityRow row;
    row.name = std::move(name);
    row.lhs = lhs;
    row.rhs = std::numeric_limits<double>::quiet_NaN();
    row.gap = std::numeric_limits<double>::quiet_NaN();
    row.scale = scale;
    row.rel = std::numeric_limits<double>::quiet_NaN();
    row.has_verdict = false;
    row.pass = false;
    row.note = std::string("domain error: ") + what;
    return row;
}

inline double integral_sigma1(const GeometryFields& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.nodes; ++i) acc += f.dmu[i] * f.sig_at(i, 1);
    return acc;
}

inline std::string experiment_id(const std::string& family, GridMode mode, int n, int resolution,
                                 double rho0, double eps, int ell) {
    std::string id = "n" + std::to_string(n) + "-" + grid_mode_name(mode) + "-res"
                     + std::to_string(resolution) + "-" + family;
    if (family == "custom") return id;
    id += "-rho" + fmt_double(rho0);
    if (eps != 0.0) id += "-eps" + fmt_double(eps) + "-ell" + std::to_string(ell);
    return id;
}

}  // namespace detail

// Evaluate every comparison available at this dimension:
//   A_k >= xi_{k,k-2}(A_{k-2})   for k = 2..n-1 (k = 1 coincides with the volume row m = 1),
//   A_m >= xi_{m,-1}(A_{-1})     for m = 0..n-1,
//   (int sigma_1 dmu)^2 >= Xi(A_0^2).
// Right-hand sides come from closed forms where one exists and from the sphere-family
// tables otherwise, so no inequality is scored against the machinery it tests. A
// non-convex input still gets its gaps computed, but no row carries a verdict.
inline VerificationReport verify_inequalities(const GeometryFields& f,
                                              const EnvironmentStamp& env = {}) {
    const int n = f.n;
    VerificationReport rep;
    rep.n = n;
    rep.mode = f.mode;
    rep.resolution = f.grid.resolution;
    rep.min_kappa = f.min_kappa;
    rep.hypothesis_ok = f.min_kappa > 0.0;
    rep.env = env;
    rep.experiment = detail::experiment_id("custom", f.mode, n, f.grid.resolution, 0, 0, 0);

    const QuermassVector q = quermass_vector(f);
    const bool verdicts = rep.hypothesis_ok;

    for (int k = 2; k <= n - 1; ++k) {
        const std::string name = detail::pair_row_name(k, k - 2);
        const double scale = s_k(n, k);
        try {
            const double rhs = (k == 2) ? xi_closed_20(n, q.a(0))
                                        : xi_parametric(n, k, k - 2, env.xi_knots).eval(q.a(k - 2));
            rep.rows.push_back(detail::scored_row(name, q.a(k), rhs, scale, verdicts, env.pass_tol));
        } catch (const std::domain_error& e) {
            rep.rows.push_back(detail::errored_row(name, q.a(k), scale, e.what()));
        }
    }

    for (int m = 0; m <= n - 1; ++m) {
        const std::string name = detail::pair_row_name(m, -1);
        const double scale = s_k(n, m);
        try {
            const double rhs = xi_parametric(n, m, -1, env.xi_knots).eval(q.a(-1));
            rep.rows.push_back(detail::scored_row(name, q.a(m), rhs, scale, verdicts, env.pass_tol));
        } catch (const std::domain_error& e) {
            rep.rows.push_back(detail::errored_row(name, q.a(m), scale, e.what()));
        }
    }

    {
        const std::string name = "(int sigma_1 dmu)^2 >= Xi(A_0^2)";
        const double is1 = detail::integral_sigma1(f);
        const double lhs = is1 * is1;
        const double s1 = s_k(n, 1);
        const double scale = s1 * s1;  // squared to match the units of the row
        try {
            const double rhs = xi_closed_minkowski_sq(n, q.a(0) * q.a(0));
            rep.rows.push_back(detail::scored_row(name, lhs, rhs, scale, verdicts, env.pass_tol));
        } catch (const std::domain_error& e) {
            rep.rows.push_back(detail::errored_row(name, lhs, scale, e.what()));
        }
    }

    return rep;
}

inline VerificationReport verify_inequalities(const RadialGraph& g,
                                              const EnvironmentStamp& env = {}) {
    return verify_inequalities(compute_geometry(g), env);
}

inline VerificationReport verify_inequalities(const ShapeSpec& shape, GridMode mode, int n,
                                              int resolution, const EnvironmentStamp& env = {}) {
    VerificationReport rep = verify_inequalities(build_shape(shape, mode, n, resolution), env);
    rep.family = shape.family();
    rep.rho0 = shape.rho0;
    rep.eps = shape.eps;
    rep.ell = shape.ell;
    rep.experiment =
        detail::experiment_id(rep.family, mode, n, resolution, shape.rho0, shape.eps, shape.ell);
    return rep;
}

// ---------------------------------------------------------------------------
// Family sweeps

struct SweepSpec {
    std::vector<int> n_list;
    std::vector<double> rho0_list;
    std::vector<double> eps_list;
    std::vector<int> ell_list;
    std::vector<int> resolutions;
    GridMode mode = GridMode::axisym;
    EnvironmentStamp env;
};

struct SweepSummary {
    int total = 0;
    int passed = 0;
    int failed = 0;
    int hypothesis_violated = 0;
    int errors = 0;

    bool all_pass() const { return passed == total; }
};

struct SweepResult {
    std::vector<VerificationReport> reports;
    SweepSummary summary;
};

// Cartesian product over (n, rho0, eps, ell, resolution) in that nesting order.
// Experiments run in parallel but land in fixed slots, so the report list and the
// summary are identical across worker counts. A broken experiment (bad grid, shape
// outside the hemisphere) is recorded and the sweep keeps going.
inline SweepResult sweep(const SweepSpec& spec) {
    struct Exp {
        int n;
        double rho0;
        double eps;
        int ell;
        int res;
    };
    std::vector<Exp> exps;
    for (int n : spec.n_list)
        for (double rho0 : spec.rho0_list)
            for (double eps : spec.eps_list)
                for (int ell : spec.ell_list)
                    for (int res : spec.resolutions) exps.push_back({n, rho0, eps, ell, res});

    SweepResult out;
    out.reports.resize(exps.size());
    detail::run_indexed(exps.size(), [&](std::size_t i) {
        const Exp& e = exps[i];
        const ShapeSpec shape{e.rho0, e.eps, e.ell};
        try {
            out.reports[i] = verify_inequalities(shape, spec.mode, e.n, e.res, spec.env);
        } catch (const std::exception& ex) {
            VerificationReport rep;
            rep.n = e.n;
            rep.mode = spec.mode;
            rep.resolution = e.res;
            rep.family = shape.family();
            rep.rho0 = e.rho0;
            rep.eps = e.eps;
            rep.ell = e.ell;
            rep.env = spec.env;
            rep.error = ex.what();
            rep.experiment =
                detail::experiment_id(rep.family, spec.mode, e.n, e.res, e.rho0, e.eps, e.ell);
            out.reports[i] = rep;
        }
    });

    for (const auto& rep : out.reports) {
        ++out.summary.total;
        if (!rep.error.empty())
            ++out.summary.errors;
        else if (!rep.hypothesis_ok)
            ++out.summary.hypothesis_violated;
        else if (rep.all_pass())
            ++out.summary.passed;
        else
            ++out.summary.failed;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid-refinement studies

enum class ConvergenceCheck { minkowski_residual, support_gradient_residual, rate_check };

inline const char* convergence_check_name(ConvergenceCheck c) {
    switch (c) {
        case ConvergenceCheck::minkowski_residual: return "minkowski_residual";
        case ConvergenceCheck::support_gradient_residual: return "support_gradient_residual";
        case ConvergenceCheck::rate_check: return "rate_check";
    }
    return "?";
}

inline ConvergenceCheck convergence_check_from_name(const std::string& s) {
    if (s == "minkowski_residual") return ConvergenceCheck::minkowski_residual;
    if (s == "support_gradient_residual") return ConvergenceCheck::support_gradient_residual;
    if (s == "rate_check") return ConvergenceCheck::rate_check;
    throw std::invalid_argument("convergence_check_from_name: unknown check '" + s + "'");
}

struct StudyOptions {
    int n = 2;
    GridMode mode = GridMode::axisym;
    ShapeSpec shape{pi / 4.0, 0.05, 2};
    int index = 0;  // sigma order for minkowski_residual, quermass index for rate_check
    // rate_check only: fixed-step expansion run parameters. The step must satisfy the
    // explicit stability bound at the finest resolution in the study.
    double rate_dt = 2e-4;
    double rate_t_end = 0.05;
    int rate_flow_k = 1;
    EnvironmentStamp env;
};

struct ConvergenceStudy {
    ConvergenceCheck check = ConvergenceCheck::minkowski_residual;
    int n = 0;
    GridMode mode = GridMode::axisym;
    ShapeSpec shape;
    int index = 0;
    std::vector<ConvergenceRow> rows;
    bool saturated = false;
    double order = std::numeric_limits<double>::quiet_NaN();

    std::string order_label() const {
        if (saturated) return "saturated";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", order);
        return buf;
    }
};

namespace detail {

inline double study_residual(ConvergenceCheck check, const StudyOptions& opt, int resolution) {
    if (check == ConvergenceCheck::rate_check) {
        FlowSpec fs;
        fs.law = FlowLaw::gerhardt;
        fs.k = opt.rate_flow_k;
        fs.dt_init = fs.dt_min = fs.dt_max = opt.rate_dt;
        fs.t_max = opt.rate_t_end;
        fs.record_interval = 0.0;
        const FlowTrace trace =
            flow_run(build_shape(opt.shape, opt.mode, opt.n, resolution), fs);
        return rate_check(trace, RateQuantity::quermass, opt.index).rel;
    }
    const GeometryFields f =
        compute_geometry(build_shape(opt.shape, opt.mode, opt.n, resolution));
    if (check == ConvergenceCheck::support_gradient_residual) return support_gradient_residual(f);
    // Minkowski identity, measured relative to its right-hand side
    const int k = opt.index;
    double rhs = 0.0;
    for (std::size_t i = 0; i < f.nodes; ++i) rhs += f.dmu[i] * f.phip[i] * f.sig_at(i, k);
    rhs *= static_cast<double>(opt.n - k);
    return std::abs(minkowski_residual(f, k)) / std::abs(rhs);
}

}  // namespace detail

// Measure one residual across a doubling ladder of resolutions and fit the observed
// order as the least-squares slope of log(residual) against log(spacing). Residuals
// at the rounding floor (geodesic spheres hit it immediately) make the fit
// meaningless, so such studies are reported as saturated instead.
inline ConvergenceStudy convergence_study(ConvergenceCheck check,
                                          const std::vector<int>& resolutions,
                                          const StudyOptions& opt = {}) {
    if (resolutions.size() < 3)
        throw std::invalid_argument("convergence_study: need at least 3 resolutions");
    for (std::size_t i = 1; i < resolutions.size(); ++i)
        if (resolutions[i] != 2 * resolutions[i - 1])
            throw std::invalid_argument(
                "convergence_study: each resolution must double the previous one");

    ConvergenceStudy study;
    study.check = check;
    study.n = opt.n;
    study.mode = opt.mode;
    study.shape = opt.shape;
    study.index = opt.index;
    study.rows.resize(resolutions.size());

    detail::run_indexed(resolutions.size(), [&](std::size_t i) {
        ConvergenceRow row;
        row.resolution = resolutions[i];
        row.spacing = pi / resolutions[i];
        row.residual = detail::study_residual(check, opt, resolutions[i]);
        study.rows[i] = row;
    });

    for (std::size_t i = 1; i < study.rows.size(); ++i) {
        const ConvergenceRow& a = study.rows[i - 1];
        ConvergenceRow& b = study.rows[i];
        if (a.residual > 0.0 && b.residual > 0.0)
            b.step_order = std::log(a.residual / b.residual) / std::log(a.spacing / b.spacing);
    }

    for (const auto& row : study.rows)
        if (row.residual < opt.env.saturation_floor) study.saturated = true;
    if (study.saturated) return study;

    double sx = 0.0, sy = 0.0;
    for (const auto& row : study.rows) {
        sx += std::log(row.spacing);
        sy += std::log(row.residual);
    }
    const double mx = sx / static_cast<double>(study.rows.size());
    const double my = sy / static_cast<double>(study.rows.size());
    double num = 0.0, den = 0.0;
    for (const auto& row : study.rows) {
        const double dx = std::log(row.spacing) - mx;
        num += dx * (std::log(row.residual) - my);
        den += dx * dx;
    }
    study.order = num / den;
    return study;
}

// ---------------------------------------------------------------------------
// Rigidity: second-order vanishing of the gaps at the sphere

struct RigidityFamily {
    std::string name;
    std::vector<double> gaps;  // one per eps, same order as the study's eps list
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool positive = false;  // every gap strictly positive
};

struct RigidityStudy {
    int n = 0;
    GridMode mode = GridMode::axisym;
    int resolution = 0;
    double rho0 = 0.0;
    int ell = 2;
    std::vector<double> eps;
    std::vector<RigidityFamily> families;
    EnvironmentStamp env;
};

// Perturb a sphere by a ladder of amplitudes and fit, per inequality, the log-log
// slope of gap against eps. Equality at the sphere is second-order rigid, so the
// fitted slope should sit at 2.
inline RigidityStudy rigidity_sweep(int n, GridMode mode, int resolution, double rho0, int ell,
                                    const std::vector<double>& eps_list,
                                    const EnvironmentStamp& env = {}) {
    if (eps_list.size() < 2)
        throw std::invalid_argument("rigidity_sweep: need at least 2 amplitudes");
    for (double e : eps_list)
        if (!(e > 0.0)) throw std::invalid_argument("rigidity_sweep: amplitudes must be positive");

    RigidityStudy study;
    study.n = n;
    study.mode = mode;
    study.resolution = resolution;
    study.rho0 = rho0;
    study.ell = ell;
    study.eps = eps_list;
    study.env = env;

    std::vector<VerificationReport> reports(eps_list.size());
    detail::run_indexed(eps_list.size(), [&](std::size_t i) {
        reports[i] =
            verify_inequalities(ShapeSpec{rho0, eps_list[i], ell}, mode, n, resolution, env);
    });

    study.families.resize(reports[0].rows.size());
    for (std::size_t r = 0; r < reports[0].rows.size(); ++r) {
        RigidityFamily& fam = study.families[r];
        fam.name = reports[0].rows[r].name;
        fam.positive = true;
        for (const auto& rep : reports) {
            const double gap = rep.rows[r].gap;
            fam.gaps.push_back(gap);
            if (!(gap > 0.0)) fam.positive = false;
        }
        if (!fam.positive) continue;
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < eps_list.size(); ++i) {
            sx += std::log(eps_list[i]);
            sy += std::log(fam.gaps[i]);
        }
        const double mx = sx / static_cast<double>(eps_list.size());
        const double my = sy / static_cast<double>(eps_list.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < eps_list.size(); ++i) {
            const double dx = std::log(eps_list[i]) - mx;
            num += dx * (std::log(fam.gaps[i]) - my);
            den += dx * dx;
        }
        fam.slope = num / den;
    }
    return study;
}

}  // namespace qf
