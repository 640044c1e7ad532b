#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/common.hpp"
#include "qf/quermass.hpp"

namespace qf {

// thrown when a comparison ODE is asked for outside the range where its printed
// coefficients make sense (the k=3 case divides by k-3)
struct unsupported_formula_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// closed form for the squared-Minkowski comparison: maps s = A_0^2 to the sharp
// lower bound for (int sigma_1 dmu)^2. Derived from the geodesic-sphere family:
//   int sigma_1 = n cos(rho) sin^{n-1}(rho) |S^n|,  A_0 = |S^n| sin^n(rho).
inline double xi_closed_minkowski_sq(int n, double s) {
    const double N = sphere_measure(n);
    if (!(s > 0.0) || !(s <= N * N))
        throw std::domain_error("xi_closed_minkowski_sq: argument outside (0, s_0^2]");
    return n * n * (std::pow(N, 2.0 / n) * std::pow(s, (n - 1.0) / n) - s);
}

inline double xi_closed_minkowski_sq_prime(int n, double s) {
    const double N = sphere_measure(n);
    return n * n * (((n - 1.0) / n) * std::pow(N, 2.0 / n) * std::pow(s, -1.0 / n) - 1.0);
}

// closed form for xi_{2,0}: A_2 of the geodesic sphere whose area is s. From the
// recursion A_2 = int sigma_2 + (n-1) A_0 with
//   int sigma_2 = C(n,2) (N^{2/n} s^{(n-2)/n} - s),  N = |S^n|,
// so the linear coefficient is C(n,2) - (n-1) = (n-1)(n-2)/2. At n=3 this agrees
// with the often-quoted (n-1)/2; for n >= 4 only this grouping reproduces the
// sphere sweep (see the residual tests).
inline double xi_closed_20(int n, double s) {
    if (n < 3) throw std::domain_error("xi_closed_20: requires n >= 3");
    const double N = sphere_measure(n);
    if (!(s > 0.0) || !(s <= N))
        throw std::domain_error("xi_closed_20: argument outside (0, s_0]");
    const double c = 0.5 * n * (n - 1) * std::pow(N, 2.0 / n);
    return c * std::pow(s, (n - 2.0) / n) - 0.5 * (n - 1.0) * (n - 2.0) * s;
}

inline double xi_closed_20_prime(int n, double s) {
    const double N = sphere_measure(n);
    const double c = 0.5 * n * (n - 1) * std::pow(N, 2.0 / n);
    return c * ((n - 2.0) / n) * std::pow(s, -2.0 / n) - 0.5 * (n - 1.0) * (n - 2.0);
}

enum class XiKind { closed_minkowski_sq, closed_20, parametric, ode };

inline const char* xi_kind_name(XiKind k) {
    switch (k) {
        case XiKind::closed_minkowski_sq: return "closed_minkowski_sq";
        case XiKind::closed_20: return "closed_20";
        case XiKind::parametric: return "parametric";
        case XiKind::ode: return "ode";
    }
    return "?";
}

// comparison function A_k = xi_{k,l}(A_l) along the geodesic-sphere family.
// Table kinds carry a strictly increasing Hermite table; closed kinds delegate
// to the formulas above. closed_minkowski_sq acts on squared quantities
// (abscissa A_0^2, value (int sigma_1)^2) which the squared flag records.
struct XiFunction {
    int n = 0, k = 0, l = 0;
    XiKind kind = XiKind::parametric;
    bool squared = false;
    double domain_hi = 0.0;           // admissible abscissae: (0, domain_hi), tables;
                                      // (0, domain_hi], closed forms
    std::vector<double> xs, ys, ms;   // knots, values, slopes (table kinds only)

    double eval(double s) const;
    double operator()(double s) const { return eval(s); }
};

namespace detail {

// one cubic Hermite segment
inline double hermite(double x0, double x1, double y0, double y1, double m0, double m1,
                      double s) {
    const double h = x1 - x0, t = (s - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0
           + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
}

// clamp tangents so the interpolant cannot overshoot the monotone data
inline void fritsch_carlson_clamp(const std::vector<double>& xs, const std::vector<double>& ys,
                                  std::vector<double>& ms) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if (d <= 0.0) continue;
        double a = ms[i] / d, b = ms[i + 1] / d;
        if (a < 0.0) { ms[i] = 0.0; a = 0.0; }
        if (b < 0.0) { ms[i + 1] = 0.0; b = 0.0; }
        const double r = a * a + b * b;
        if (r > 9.0) {
            const double tau = 3.0 / std::sqrt(r);
            ms[i] = tau * a * d;
            ms[i + 1] = tau * b * d;
        }
    }
}

inline double table_eval(const XiFunction& f, double s) {
    const auto it = std::upper_bound(f.xs.begin(), f.xs.end(), s);
    std::size_t j = static_cast<std::size_t>(it - f.xs.begin());
    if (j == 0) j = 1;
    if (j >= f.xs.size()) j = f.xs.size() - 1;
    return hermite(f.xs[j - 1], f.xs[j], f.ys[j - 1], f.ys[j], f.ms[j - 1], f.ms[j], s);
}

} // namespace detail

inline double XiFunction::eval(double s) const {
    switch (kind) {
        case XiKind::closed_minkowski_sq: return xi_closed_minkowski_sq(n, s);
        case XiKind::closed_20: return xi_closed_20(n, s);
        default: break;
    }
    if (!(s > 0.0) || !(s < domain_hi))
        throw std::domain_error("xi evaluation outside (0, " + std::to_string(domain_hi) + ")");
    if (s >= xs.front() && s <= xs.back()) return detail::table_eval(*this, s);
    if (kind == XiKind::parametric) {
        // endpoint neighborhoods: invert the abscissa closed form exactly instead
        // of extrapolating the table
        const double rho = eta_k(n, l, s);
        return sphere_quermass(n, rho, k);
    }
    // ode table reaches machine-small abscissae; below it use the power-law
    // asymptote calibrated at the lowest knot
    const double p = (n - 2.0) / n;
    return ys.front() * std::pow(s / xs.front(), p);
}

// xi_{k,l} built directly from the sphere family: knots are (A_l(B_rho), A_k(B_rho))
// over a Chebyshev-clustered rho grid, tangents are the exact slope ratios
// dA_k/dA_l = A_k'(rho)/A_l'(rho), and interpolation is shape preserving.
inline XiFunction xi_parametric(int n, int k, int l, int knots) {
    if (!(-1 <= l && l < k && k <= n - 1))
        throw std::domain_error("xi_parametric: indices must satisfy -1 <= l < k <= n-1");
    if (knots < 200) throw std::domain_error("xi_parametric: need at least 200 knots");
    XiFunction f;
    f.n = n;
    f.k = k;
    f.l = l;
    f.kind = XiKind::parametric;
    f.domain_hi = s_k(n, l);
    const double a = 1e-3, b = pi / 2.0 - 1e-3;
    f.xs.resize(static_cast<std::size_t>(knots));
    f.ys.resize(static_cast<std::size_t>(knots));
    f.ms.resize(static_cast<std::size_t>(knots));
    std::size_t kept = 0;
    for (int j = 0; j < knots; ++j) {
        const double t = 0.5 * (1.0 - std::cos(pi * j / (knots - 1)));
        const double rho = a + (b - a) * t;
        const double x = sphere_quermass(n, rho, l);
        const double y = sphere_quermass(n, rho, k);
        // near the flat ends the clustered knots can collide at double
        // precision; keep only strictly advancing ones
        if (kept > 0 && (!(x > f.xs[kept - 1]) || !(y > f.ys[kept - 1]))) continue;
        f.xs[kept] = x;
        f.ys[kept] = y;
        f.ms[kept] = sphere_quermass_derivative(n, rho, k)
                     / sphere_quermass_derivative(n, rho, l);
        ++kept;
    }
    f.xs.resize(kept);
    f.ys.resize(kept);
    f.ms.resize(kept);
    if (kept < 2) throw std::logic_error("xi_parametric: table degenerated");
    detail::fritsch_carlson_clamp(f.xs, f.ys, f.ms);
    return f;
}

// wrap a closed form as a XiFunction
inline XiFunction xi_closed_function(int n, XiKind kind) {
    XiFunction f;
    f.n = n;
    f.kind = kind;
    if (kind == XiKind::closed_minkowski_sq) {
        f.k = 1;
        f.l = 0;
        f.squared = true;
        const double N = sphere_measure(n);
        f.domain_hi = N * N;
    } else if (kind == XiKind::closed_20) {
        if (n < 3) throw std::domain_error("xi_closed_function: closed_20 requires n >= 3");
        f.k = 2;
        f.l = 0;
        f.domain_hi = sphere_measure(n);
    } else {
        throw std::domain_error("xi_closed_function: kind has no closed form");
    }
    return f;
}

// xi_{2,0} by integrating its first-order relation
//   xi' = (n-2) (xi - (n-1) s) / (n s)
// backward from the equator value xi(s_0) = (n-1) s_0, in u = ln s so the
// s -> 0 end stays regular: d(xi)/du = (n-2) (xi - (n-1) e^u) / n.
inline XiFunction xi_ode_20(int n) {
    if (n < 3) throw std::domain_error("xi_ode_20: requires n >= 3");
    XiFunction f;
    f.n = n;
    f.k = 2;
    f.l = 0;
    f.kind = XiKind::ode;
    f.domain_hi = sphere_measure(n);

    const int steps = 30000;
    const double du = -1e-3;
    const double u0 = std::log(f.domain_hi);
    auto rhs = [n](double u, double xi) {
        return (n - 2.0) * (xi - (n - 1.0) * std::exp(u)) / n;
    };
    std::vector<double> us(steps + 1), vals(steps + 1);
    us[0] = u0;
    vals[0] = (n - 1.0) * f.domain_hi;
    for (int i = 0; i < steps; ++i) {
        const double u = us[static_cast<std::size_t>(i)];
        const double x = vals[static_cast<std::size_t>(i)];
        const double k1 = rhs(u, x);
        const double k2 = rhs(u + 0.5 * du, x + 0.5 * du * k1);
        const double k3 = rhs(u + 0.5 * du, x + 0.5 * du * k2);
        const double k4 = rhs(u + du, x + du * k3);
        us[static_cast<std::size_t>(i + 1)] = u + du;
        vals[static_cast<std::size_t>(i + 1)] = x + du / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const std::size_t m = us.size();
    f.xs.resize(m);
    f.ys.resize(m);
    f.ms.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = m - 1 - i;  // reverse into increasing abscissae
        const double s = std::exp(us[j]);
        f.xs[i] = s;
        f.ys[i] = vals[j];
        f.ms[i] = rhs(us[j], vals[j]) / s;  // d(xi)/ds = (d(xi)/du)/s
    }
    // exp(log(s0)) can be an ulp off; pin the top knot so in-domain queries
    // never fall past the table
    f.xs.back() = f.domain_hi;
    f.ys.back() = (n - 1.0) * f.domain_hi;
    for (std::size_t j = 1; j < m; ++j)
        if (!(f.xs[j] > f.xs[j - 1]) || !(f.ys[j] > f.ys[j - 1]))
            throw std::logic_error("xi_ode_20: integration lost monotonicity");
    detail::fritsch_carlson_clamp(f.xs, f.ys, f.ms);
    return f;
}

// preimage of y under a strictly increasing comparison function
inline double xi_inverse(const XiFunction& f, double y) {
    if (f.kind == XiKind::closed_minkowski_sq)
        throw std::domain_error("xi_inverse: the squared-Minkowski comparison is not monotone");
    const double top = s_k(f.n, f.k);
    const bool closed_end = f.kind == XiKind::closed_20;
    if (!(y > 0.0) || (closed_end ? !(y <= top * (1.0 + 1e-13)) : !(y < top)))
        throw std::domain_error("xi_inverse: value outside the range (0, "
                                + std::to_string(top) + ")");
    // the supremum is approached quadratically flat, so values within roundoff
    // of it cannot be separated by bisection; map them to the endpoint
    if (closed_end && y >= top * (1.0 - 1e-13)) return f.domain_hi;
    double lo = 0.0, hi = f.domain_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(lo, 1e-300 * hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f.eval(mid) < y) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// residual of the first-order comparison relation
//   xi'_{k,k-2}(s) = (n-k)/(n-k+2) * (xi_{k,k-2}(s) - (n-k+1)/(k-1) s)
//                    / (s - (n-k+3)/(k-3) * xi^{-1}_{k-2,k-4}(s))
// with a centered-difference derivative on the table. Only defined for k >= 4:
// the k=3 coefficient divides by zero and no replacement relation is available.
inline double xi_ode_residual(int n, int k, const XiFunction& fk, const XiFunction& fkm2,
                              double s) {
    if (k <= 3)
        throw unsupported_formula_error(
            "xi_ode_residual: comparison relation requires k >= 4 (coefficient has k-3 in a "
            "denominator)");
    const double h = 1e-6 * s;
    const double num = (fk.eval(s + h) - fk.eval(s - h)) / (2.0 * h);
    const double inv = xi_inverse(fkm2, s);
    const double denom = s - static_cast<double>(n - k + 3) / (k - 3) * inv;
    const double rhs = static_cast<double>(n - k) / (n - k + 2)
                       * (fk.eval(s) - static_cast<double>(n - k + 1) / (k - 1) * s) / denom;
    return num - rhs;
}

} // namespace qf
