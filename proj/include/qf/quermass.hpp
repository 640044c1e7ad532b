#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/common.hpp"
#include "qf/surface.hpp"

namespace qf {

// integral of sin^n r on [0, rho], by the exact reduction
//   n I_n = -cos(rho) sin^{n-1}(rho) + (n-1) I_{n-2},  I_0 = rho,  I_1 = 1 - cos(rho)
// which reproduces the textbook antiderivatives (n=2: rho/2 - sin(2 rho)/4, etc.)
// for every n without quadrature.
inline double sin_power_integral(int n, double rho) {
    if (n < 0) throw std::domain_error("sin_power_integral: negative power");
    const double c = std::cos(rho), s = std::sin(rho);
    double val;
    int m;
    if (n % 2 == 0) { val = rho; m = 2; }
    else            { val = 1.0 - c; m = 3; }
    double spow = (n % 2 == 0) ? s : s * s;  // sin^{m-1}
    const double s2 = s * s;
    for (; m <= n; m += 2) {
        val = (-c * spow + (m - 1) * val) / m;
        spow *= s2;
    }
    return val;
}

// quermassintegrals A_k, k = -1..n-1, of the domain enclosed by a hypersurface in
// the upper hemisphere. A_{-1} is the enclosed volume, A_0 the surface area, and
// higher entries follow the curvature-integral recursion with ambient curvature K=1.
struct QuermassVector {
    int n = 0;
    double K = 1.0;
    std::vector<double> values;  // values[k+1] holds A_k

    double a(int k) const { return values[static_cast<std::size_t>(k + 1)]; }
    double& a(int k) { return values[static_cast<std::size_t>(k + 1)]; }
    int top_index() const { return n - 1; }
};

inline double enclosed_volume(const RoundGrid& grid, const std::vector<double>& rho) {
    // Vol = int_{S^n} F_n(rho(z)) dz with F_n the radial sin^n antiderivative
    double vol = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        vol += grid.node_weight(i) * sin_power_integral(grid.n, rho[i]);
    return vol;
}

inline double enclosed_volume(const RadialGraph& g) {
    validate_graph(g);
    return enclosed_volume(g.grid, g.rho);
}

inline QuermassVector quermass_vector(const GeometryFields& f) {
    const int n = f.n;
    QuermassVector q;
    q.n = n;
    q.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
    q.a(-1) = enclosed_volume(f.grid, f.rho);

    std::vector<double> isig(static_cast<std::size_t>(n), 0.0);
    for (std::size_t node = 0; node < f.nodes; ++node) {
        const double w = f.dmu[node];
        for (int k = 0; k < n; ++k) isig[static_cast<std::size_t>(k)] += w * f.sig_at(node, k);
    }

    q.a(0) = isig[0];
    if (n >= 2) q.a(1) = isig[1] + n * q.K * q.a(-1);
    for (int k = 2; k <= n - 1; ++k)
        q.a(k) = isig[static_cast<std::size_t>(k)]
                 + q.K * static_cast<double>(n - k + 1) / (k - 1) * q.a(k - 2);
    return q;
}

inline QuermassVector quermass_vector(const RadialGraph& g) {
    return quermass_vector(compute_geometry(g));
}

// int_{B_rho boundary} sigma_m dmu = C(n,m) cos^m(rho) sin^{n-m}(rho) |S^n|
inline double sphere_sigma_integral(int n, double rho, int m) {
    if (m < 0 || m > n) throw std::domain_error("sphere_sigma_integral: order out of range");
    return binom(n, m) * std::pow(std::cos(rho), m) * std::pow(std::sin(rho), n - m)
           * sphere_measure(n);
}

// closed-form A_k of the geodesic ball of radius rho, the oracle for everything else
inline double sphere_quermass(int n, double rho, int k) {
    if (!(rho > 0.0) || !(rho <= pi / 2.0))
        throw std::domain_error("sphere_quermass: radius must lie in (0, pi/2]");
    if (k < -1 || k > n - 1)
        throw std::domain_error("sphere_quermass: index must lie in [-1, n-1]");
    if (k == -1) return sphere_measure(n) * sin_power_integral(n, rho);
    if (k == 0) return sphere_sigma_integral(n, rho, 0);
    if (k == 1) return sphere_sigma_integral(n, rho, 1) + n * sphere_quermass(n, rho, -1);
    return sphere_sigma_integral(n, rho, k)
           + static_cast<double>(n - k + 1) / (k - 1) * sphere_quermass(n, rho, k - 2);
}

// d/drho of A_k(B_rho): (k+1) * int sigma_{k+1} for k >= 0, surface area for k = -1
inline double sphere_quermass_derivative(int n, double rho, int k) {
    if (k == -1) return sphere_sigma_integral(n, rho, 0);
    return (k + 1) * sphere_sigma_integral(n, rho, k + 1);
}

// hemisphere values s_k = A_k(B_{pi/2}), the right endpoints of the xi domains
inline double s_k(int n, int k) { return sphere_quermass(n, pi / 2.0, k); }

// normalized quermassintegral W_{k+1} from A_k
inline double wk_from_ak(int n, int k, double a) {
    if (k < 0 || k > n - 1) throw std::domain_error("wk_from_ak: index must lie in [0, n-1]");
    return a / ((n + 1) * binom(n, k));
}

// inverse of rho -> A_k(B_rho): the radius whose geodesic ball has quermassintegral a
inline double eta_k(int n, int k, double a) {
    const double top = s_k(n, k);
    if (!(a > 0.0) || !(a < top))
        throw std::domain_error("eta_k: value " + std::to_string(a)
                                + " outside the sphere range (0, " + std::to_string(top) + ")");
    double lo = 0.0, hi = pi / 2.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (sphere_quermass(n, mid, k) < a) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace qf
