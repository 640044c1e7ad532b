#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qf/quermass.hpp"
#include "qf/spectrum.hpp"
#include "qf/surface.hpp"
#include "qf/xi.hpp"

namespace qf {

enum class FlowLaw { gerhardt, cgls, cgls0 };

inline const char* flow_law_name(FlowLaw law) {
    switch (law) {
        case FlowLaw::gerhardt: return "gerhardt";
        case FlowLaw::cgls: return "cgls";
        case FlowLaw::cgls0: return "cgls0";
    }
    return "?";
}

inline FlowLaw flow_law_from_name(const std::string& s) {
    if (s == "gerhardt") return FlowLaw::gerhardt;
    if (s == "cgls") return FlowLaw::cgls;
    if (s == "cgls0") return FlowLaw::cgls0;
    throw std::invalid_argument("unknown flow law: " + s);
}

struct FlowSpec {
    FlowLaw law = FlowLaw::gerhardt;
    int k = 1;                     // curvature index; ignored by cgls0
    double dt_init = 1e-3;
    double cfl_safety = 0.4;
    double dt_min = 1e-10;
    double dt_max = 1e-2;
    double t_max = 10.0;
    double equator_tol = 1e-3;     // gerhardt stop: min rho > pi/2 - equator_tol
    double stationarity_tol = 1e-6;// cgls/cgls0 stop: max |f| below this
    double record_interval = 0.0;  // 0 records every accepted step
};

inline void validate_flow_spec(const FlowSpec& s, int n) {
    if (!(s.dt_init > 0.0) || !(s.dt_min > 0.0) || !(s.dt_max >= s.dt_min))
        throw std::invalid_argument("flow spec: step sizes must be positive with dt_max >= dt_min");
    if (!(s.cfl_safety > 0.0) || !(s.cfl_safety < 1.0))
        throw std::invalid_argument("flow spec: cfl_safety must lie in (0,1)");
    if (!(s.t_max > 0.0) || !(s.equator_tol > 0.0) || !(s.stationarity_tol > 0.0)
        || !(s.record_interval >= 0.0))
        throw std::invalid_argument("flow spec: stop parameters must be positive");
    if (s.law == FlowLaw::gerhardt && (s.k < 1 || s.k > n))
        throw std::invalid_argument("flow spec: gerhardt speed needs 1 <= k <= n");
    if (s.law == FlowLaw::cgls && (s.k < 0 || s.k > n - 1))
        throw std::invalid_argument("flow spec: cgls speed needs 0 <= k <= n-1");
}

// which Q monitor to track along a run: the squared-Minkowski gap or the
// A_k-vs-xi_{k,k-2} gap for a given k (k=2 reproduces the area-based variant)
struct MonitorSpec {
    enum Kind { minkowski_sq, pair } kind = pair;
    int k = 1;
};

struct TraceRecord {
    double t = 0.0;
    double dt = 0.0;               // step that produced this state (0 for the start)
    QuermassVector q;
    double min_kappa = 0.0;
    double max_speed = 0.0;        // max |f| over nodes
    std::vector<double> monitors;  // Q value per configured monitor
    // per-record integrals used by rate_check, all with the current speed f:
    std::vector<double> sigma_integrals;  // int sigma_m dmu, m = 0..n
    double speed_volume_rate = 0.0;       // int f dmu
    std::vector<double> quermass_rates;   // (l+1) int f sigma_{l+1} dmu, l = 0..n-1
    std::vector<double> sigma_rates;      // int f[(l+1)sigma_{l+1}-(n-l+1)sigma_{l-1}], l = 0..n-1
};

struct FlowTrace {
    int n = 0;
    GridMode mode = GridMode::axisym;
    int resolution = 0;
    FlowSpec spec;
    std::vector<MonitorSpec> monitors;
    std::vector<TraceRecord> records;
    std::string stop_reason;  // equator | stationary | t_max | breakdown
    RadialGraph final_graph;  // state at the last recorded time
};

// the speed could not be evaluated: principal curvatures left the admissible cone
struct flow_breakdown : std::runtime_error {
    flow_breakdown(const std::string& msg, std::size_t node_, std::vector<double> spectrum_)
        : std::runtime_error(msg), node(node_), spectrum(std::move(spectrum_)) {}
    std::size_t node = 0;
    std::vector<double> spectrum;
    FlowTrace partial;  // attached by flow_run
};

// a trial step violated the radial-graph invariants; the driver halves dt
struct step_rejected_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// speed coefficient that keeps geodesic spheres stationary under the cgls law:
// at kappa = cot(rho) I we need c cos(rho) = (sigma_{k+1}/sigma_k) sin(rho),
// and the ratio evaluates to (C(n,k+1)/C(n,k)) cot(rho), so c = (n-k)/(k+1).
inline double cgls_speed_coefficient(int n, int k) {
    return static_cast<double>(n - k) / (k + 1);
}

inline int cone_index(const FlowSpec& spec) {
    if (spec.law == FlowLaw::gerhardt) return spec.k;
    if (spec.law == FlowLaw::cgls) return spec.k + 1;
    return 1;  // cgls0 needs positive mean curvature
}

// normal speed f at every node; throws flow_breakdown outside the cone
inline std::vector<double> speed_field(const FlowSpec& spec, const GeometryFields& f) {
    const int n = f.n;
    const int cone = cone_index(spec);
    std::vector<double> out(f.nodes);
    Spectrum s;
    s.values.resize(static_cast<std::size_t>(n));
    for (std::size_t node = 0; node < f.nodes; ++node) {
        f.spectrum_at(node, s.values);
        if (!in_gamma_cone(cone, s)) {
            throw flow_breakdown("speed undefined: curvature left the Gamma_"
                                     + std::to_string(cone) + " cone at node "
                                     + std::to_string(node),
                                 node, s.values);
        }
        switch (spec.law) {
            case FlowLaw::gerhardt:
                out[node] = f.sig_at(node, spec.k - 1) / f.sig_at(node, spec.k);
                break;
            case FlowLaw::cgls:
                out[node] = cgls_speed_coefficient(n, spec.k) * f.phip[node]
                            - f.sig_at(node, spec.k + 1) / f.sig_at(node, spec.k) * f.u[node];
                break;
            case FlowLaw::cgls0:
                out[node] = n * f.phip[node] - f.u[node] * f.sig_at(node, 1);
                break;
        }
    }
    if (spec.law == FlowLaw::cgls0) {
        // int (n phi' - u sigma_1) dmu vanishes identically, which is what makes
        // the law volume preserving, but the quadrature only reproduces that at
        // O(h^2) and an explicit run integrates the bias into a secular volume
        // drift. Subtracting the weighted mean restores sum_i f_i dmu_i = 0
        // exactly, so the conservation error comes from the time stepper alone.
        // On a geodesic sphere every f_i is already zero and this is a no-op.
        double num = 0.0, den = 0.0;
        for (std::size_t node = 0; node < f.nodes; ++node) {
            num += f.dmu[node] * out[node];
            den += f.dmu[node];
        }
        const double c = num / den;
        for (double& v : out) v -= c;
    }
    return out;
}

namespace detail {

inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// Polar azimuthal filter: on each latitude row, zero Fourier modes with
// m > sin(theta)/dtheta. Near the poles the physical azimuthal spacing
// sin(theta) dlambda collapses, and explicit stepping of modes finer than the
// meridian resolution is both unstable and meaningless; this caps the local
// wavenumber at the isotropic value so the theta-based CFL bound governs.
inline void pole_filter(RadialGraph& g) {
    if (g.grid.mode != GridMode::full2d) return;
    const int nl = g.grid.n_lambda;
    if (nl & (nl - 1))
        throw std::invalid_argument("pole filter needs a power-of-two azimuthal count");
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(nl));
    for (int i = 0; i < g.grid.n_theta; ++i) {
        const int m_max =
            static_cast<int>(std::floor(std::sin(g.grid.theta[static_cast<std::size_t>(i)])
                                        / g.grid.dtheta));
        if (m_max >= nl / 2) continue;
        double* row = g.rho.data() + static_cast<std::size_t>(i) * nl;
        for (int j = 0; j < nl; ++j) buf[static_cast<std::size_t>(j)] = row[j];
        fft_radix2(buf, false);
        for (int j = 0; j < nl; ++j) {
            const int m = std::min(j, nl - j);
            if (m > m_max) buf[static_cast<std::size_t>(j)] = 0.0;
        }
        fft_radix2(buf, true);
        for (int j = 0; j < nl; ++j) row[j] = buf[static_cast<std::size_t>(j)].real();
    }
}

struct StepResult {
    RadialGraph g;
    GeometryFields fields;
};

// midpoint RK2 update of rho <- rho + dt f v, with the polar filter applied to
// the result before validation; throws step_rejected_error when the trial state
// is not a valid graph or its speed is not evaluable
inline StepResult try_step(const RadialGraph& g, const GeometryFields& f1,
                           const std::vector<double>& s1, const FlowSpec& spec, double dt) {
    RadialGraph mid = g;
    for (std::size_t i = 0; i < mid.rho.size(); ++i)
        mid.rho[i] += 0.5 * dt * s1[i] * f1.v[i];
    StepResult out;
    out.g = g;
    try {
        const GeometryFields f2 = compute_geometry(mid);
        const std::vector<double> s2 = speed_field(spec, f2);
        for (std::size_t i = 0; i < out.g.rho.size(); ++i)
            out.g.rho[i] += dt * s2[i] * f2.v[i];
        pole_filter(out.g);
        out.fields = compute_geometry(out.g);
    } catch (const geometry_error& e) {
        throw step_rejected_error(std::string("step rejected: ") + e.what());
    } catch (const flow_breakdown& e) {
        throw step_rejected_error(std::string("step rejected at midpoint: ") + e.what());
    }
    return out;
}

// largest stable explicit step: dt <= cfl * dtheta^2 / (dim * D) with
// D = max over nodes of sum_i |df/dkappa_i| / phi^2, the diffusion scale of the
// graph equation. The azimuthal direction contributes a factor 2 only because
// the polar filter caps its wavenumber at the meridian resolution.
inline double cfl_dt(const FlowSpec& spec, const GeometryFields& f) {
    const int n = f.n;
    double dmax = 0.0;
    std::vector<double> kap(static_cast<std::size_t>(n));
    std::vector<double> sig(static_cast<std::size_t>(n) + 1);
    for (std::size_t node = 0; node < f.nodes; ++node) {
        f.spectrum_at(node, kap);
        for (int m = 0; m <= n; ++m)
            sig[static_cast<std::size_t>(m)] = f.sig_at(node, m);
        double s_abs = 0.0;
        for (int i = 0; i < n; ++i) {
            const std::vector<double> r =
                sigma_all_excluding(sig, kap[static_cast<std::size_t>(i)], n - 1);
            double df = 0.0;
            switch (spec.law) {
                case FlowLaw::gerhardt: {
                    const int k = spec.k;
                    const double dnum = k >= 2 ? r[static_cast<std::size_t>(k - 2)] : 0.0;
                    const double dden = r[static_cast<std::size_t>(k - 1)];
                    const double sk = sig[static_cast<std::size_t>(k)];
                    df = (dnum * sk - sig[static_cast<std::size_t>(k - 1)] * dden) / (sk * sk);
                    break;
                }
                case FlowLaw::cgls: {
                    const int k = spec.k;
                    const double dnum = r[static_cast<std::size_t>(k)];
                    const double dden = k >= 1 ? r[static_cast<std::size_t>(k - 1)] : 0.0;
                    const double sk = sig[static_cast<std::size_t>(k)];
                    df = -f.u[node] * (dnum * sk - sig[static_cast<std::size_t>(k + 1)] * dden)
                         / (sk * sk);
                    break;
                }
                case FlowLaw::cgls0:
                    df = -f.u[node];
                    break;
            }
            s_abs += std::abs(df);
        }
        const double d = s_abs / (f.phi[node] * f.phi[node]);
        dmax = std::max(dmax, d);
    }
    if (dmax <= 0.0) return spec.dt_max;
    const double dim = f.mode == GridMode::full2d ? 4.0 : 2.0;
    return spec.cfl_safety * f.grid.dtheta * f.grid.dtheta / (dim * dmax);
}

} // namespace detail

// single explicit step; exposed mainly for the scalar-reduction tests
inline RadialGraph flow_step(const RadialGraph& g, const FlowSpec& spec, double dt) {
    const GeometryFields f1 = compute_geometry(g);
    const std::vector<double> s1 = speed_field(spec, f1);
    if (dt == 0.0) return g;
    return detail::try_step(g, f1, s1, spec, dt).g;
}

inline double q_monitor_weight(int n, const MonitorSpec& m) {
    if (m.kind == MonitorSpec::minkowski_sq) return 2.0 * (n - 1.0) / n;
    return static_cast<double>(m.k) * (n - m.k) / (n - m.k + 1);
}

// exponentially weighted inequality gap at time t
inline double q_monitor(int n, const MonitorSpec& m, const XiFunction& xi, double t,
                        const QuermassVector& q) {
    double gap;
    if (m.kind == MonitorSpec::minkowski_sq) {
        const double is1 = q.a(1) - n * q.a(-1);  // int sigma_1 from the stored vector
        gap = is1 * is1 - xi.eval(q.a(0) * q.a(0));
    } else {
        gap = q.a(m.k) - xi.eval(q.a(m.k - 2));
    }
    return std::exp(-q_monitor_weight(n, m) * t) * gap;
}

inline XiFunction monitor_xi(int n, const MonitorSpec& m) {
    if (m.kind == MonitorSpec::minkowski_sq)
        return xi_closed_function(n, XiKind::closed_minkowski_sq);
    return xi_parametric(n, m.k, m.k - 2, 2000);
}

namespace detail {

inline TraceRecord make_record(double t, double dt, const GeometryFields& f,
                               const std::vector<double>& speed,
                               const std::vector<MonitorSpec>& monitors,
                               const std::vector<XiFunction>& xis) {
    const int n = f.n;
    TraceRecord rec;
    rec.t = t;
    rec.dt = dt;
    rec.q = quermass_vector(f);
    rec.min_kappa = f.min_kappa;
    rec.sigma_integrals.assign(static_cast<std::size_t>(n) + 1, 0.0);
    rec.quermass_rates.assign(static_cast<std::size_t>(n), 0.0);
    rec.sigma_rates.assign(static_cast<std::size_t>(n), 0.0);
    double maxf = 0.0, vol_rate = 0.0;
    for (std::size_t node = 0; node < f.nodes; ++node) {
        const double w = f.dmu[node];
        const double fs = speed[node];
        maxf = std::max(maxf, std::abs(fs));
        vol_rate += w * fs;
        for (int m = 0; m <= n; ++m)
            rec.sigma_integrals[static_cast<std::size_t>(m)] += w * f.sig_at(node, m);
        for (int l = 0; l <= n - 1; ++l) {
            const double slp1 = f.sig_at(node, l + 1);
            const double slm1 = l >= 1 ? f.sig_at(node, l - 1) : 0.0;
            rec.quermass_rates[static_cast<std::size_t>(l)] += w * fs * (l + 1) * slp1;
            rec.sigma_rates[static_cast<std::size_t>(l)] +=
                w * fs * ((l + 1) * slp1 - (n - l + 1) * slm1);
        }
    }
    rec.max_speed = maxf;
    rec.speed_volume_rate = vol_rate;
    rec.monitors.resize(monitors.size());
    for (std::size_t i = 0; i < monitors.size(); ++i)
        rec.monitors[i] = q_monitor(n, monitors[i], xis[i], t, rec.q);
    return rec;
}

} // namespace detail

// advance the flow with CFL-adaptive explicit steps until a stop criterion or
// breakdown; the returned trace carries everything the verify module consumes
inline FlowTrace flow_run(const RadialGraph& g0, const FlowSpec& spec,
                          const std::vector<MonitorSpec>& monitors = {}) {
    validate_graph(g0);
    const int n = g0.grid.n;
    validate_flow_spec(spec, n);

    FlowTrace trace;
    trace.n = n;
    trace.mode = g0.grid.mode;
    trace.resolution = g0.grid.resolution;
    trace.spec = spec;
    trace.monitors = monitors;

    std::vector<XiFunction> xis;
    xis.reserve(monitors.size());
    for (const auto& m : monitors) xis.push_back(monitor_xi(n, m));

    RadialGraph g = g0;
    detail::pole_filter(g);
    GeometryFields fields = compute_geometry(g);

    double t = 0.0, dt_used = 0.0, last_record = -std::numeric_limits<double>::infinity();
    int rejects = 0;
    for (;;) {
        std::vector<double> speed;
        try {
            speed = speed_field(spec, fields);
        } catch (flow_breakdown& e) {
            trace.stop_reason = "breakdown";
            trace.final_graph = g;
            e.partial = trace;
            throw;
        }

        double maxf = 0.0;
        for (double v : speed) maxf = std::max(maxf, std::abs(v));

        if (t - last_record >= spec.record_interval || trace.records.empty()) {
            trace.records.push_back(
                detail::make_record(t, dt_used, fields, speed, monitors, xis));
            last_record = t;
        }

        const double min_rho = *std::min_element(g.rho.begin(), g.rho.end());
        if (spec.law == FlowLaw::gerhardt && min_rho > pi / 2.0 - spec.equator_tol) {
            trace.stop_reason = "equator";
            break;
        }
        if (spec.law != FlowLaw::gerhardt && maxf < spec.stationarity_tol) {
            trace.stop_reason = "stationary";
            break;
        }
        if (t >= spec.t_max - 1e-15) {
            trace.stop_reason = "t_max";
            break;
        }

        double dt = std::min(detail::cfl_dt(spec, fields), spec.dt_max);
        dt = std::max(dt, spec.dt_min);
        if (trace.records.size() == 1 && rejects == 0 && t == 0.0)
            dt = std::min(dt, spec.dt_init);
        dt = std::min(dt, spec.t_max - t);

        for (;;) {
            try {
                detail::StepResult res = detail::try_step(g, fields, speed, spec, dt);
                g = std::move(res.g);
                fields = std::move(res.fields);
                t += dt;
                dt_used = dt;
                rejects = 0;
                break;
            } catch (const step_rejected_error& e) {
                dt *= 0.5;
                if (++rejects >= 20) {
                    trace.stop_reason = "breakdown";
                    trace.final_graph = g;
                    flow_breakdown b(std::string("flow stalled: 20 consecutive step rejections ("
                                     ) + e.what() + ")", 0, {});
                    b.partial = trace;
                    throw b;
                }
            }
        }
    }
    // make sure the final state is always on record
    if (trace.records.empty() || trace.records.back().t < t) {
        const std::vector<double> speed = speed_field(spec, fields);
        trace.records.push_back(detail::make_record(t, dt_used, fields, speed, monitors, xis));
    }
    trace.final_graph = g;
    return trace;
}

enum class RateQuantity { volume, quermass, sigma_integral };

struct RateReport {
    double max_abs = 0.0;   // worst |d/dt(LHS) - RHS| over interior records
    double scale = 0.0;     // max |RHS| over the trace
    double rel = 0.0;       // max_abs / scale
    std::size_t points = 0;
};

// compare centered time differences of a traced quantity against the recorded
// right-hand-side integrals
inline RateReport rate_check(const FlowTrace& trace, RateQuantity quantity, int l = 0) {
    const int n = trace.n;
    if (quantity != RateQuantity::volume && (l < 0 || l > n - 1))
        throw std::domain_error("rate_check: index out of range");
    RateReport rep;
    const auto& r = trace.records;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double rhs = 0.0;
        switch (quantity) {
            case RateQuantity::volume: rhs = r[i].speed_volume_rate; break;
            case RateQuantity::quermass:
                rhs = r[i].quermass_rates[static_cast<std::size_t>(l)];
                break;
            case RateQuantity::sigma_integral:
                rhs = r[i].sigma_rates[static_cast<std::size_t>(l)];
                break;
        }
        rep.scale = std::max(rep.scale, std::abs(rhs));
        if (i == 0 || i + 1 >= r.size()) continue;
        double lhs_lo = 0.0, lhs_hi = 0.0;
        switch (quantity) {
            case RateQuantity::volume:
                lhs_lo = r[i - 1].q.a(-1);
                lhs_hi = r[i + 1].q.a(-1);
                break;
            case RateQuantity::quermass:
                lhs_lo = r[i - 1].q.a(l);
                lhs_hi = r[i + 1].q.a(l);
                break;
            case RateQuantity::sigma_integral:
                lhs_lo = r[i - 1].sigma_integrals[static_cast<std::size_t>(l)];
                lhs_hi = r[i + 1].sigma_integrals[static_cast<std::size_t>(l)];
                break;
        }
        const double fd = (lhs_hi - lhs_lo) / (r[i + 1].t - r[i - 1].t);
        rep.max_abs = std::max(rep.max_abs, std::abs(fd - rhs));
        ++rep.points;
    }
    rep.rel = rep.scale > 0.0 ? rep.max_abs / rep.scale : rep.max_abs;
    return rep;
}

} // namespace qf
