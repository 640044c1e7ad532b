#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/common.hpp"
#include "qf/grid.hpp"
#include "qf/spectrum.hpp"

namespace qf {

// star-shaped hypersurface in the open hemisphere, written as a radius field over S^n
struct RadialGraph {
    RoundGrid grid;
    std::vector<double> rho;
};

struct geometry_error : std::runtime_error {
    std::size_t node;
    geometry_error(std::size_t node_, const std::string& what_)
        : std::runtime_error(what_ + " at node " + std::to_string(node_)), node(node_) {}
};

inline void validate_graph(const RadialGraph& g) {
    if (g.rho.size() != g.grid.node_count())
        throw std::invalid_argument("radial graph: rho size does not match grid");
    for (std::size_t i = 0; i < g.rho.size(); ++i) {
        double r = g.rho[i];
        if (!(r > 0.0 && r < 0.5 * pi) || !std::isfinite(r))
            throw geometry_error(i, "rho outside (0, pi/2)");
    }
}

inline RadialGraph geodesic_sphere(const RoundGrid& grid, double rho0) {
    if (!(rho0 > 0.0 && rho0 < 0.5 * pi)) throw std::domain_error("geodesic_sphere: rho0 outside (0, pi/2)");
    RadialGraph g;
    g.grid = grid;
    g.rho.assign(grid.node_count(), rho0);
    return g;
}

inline double legendre_p(int l, double x) {
    double pm2 = 1.0, pm1 = x;
    if (l == 0) return 1.0;
    if (l == 1) return x;
    for (int m = 2; m <= l; ++m) {
        double p = ((2 * m - 1) * x * pm1 - (m - 1) * pm2) / m;
        pm2 = pm1;
        pm1 = p;
    }
    return pm1;
}

// Schmidt semi-normalized associated Legendre function, bounded by 1 in magnitude
inline double schmidt_p(int l, int m, double x) {
    double somx2 = std::sqrt(std::max(0.0, 1.0 - x * x));
    double pmm = 1.0;
    for (int i = 1; i <= m; ++i) pmm *= (2 * i - 1) * somx2;
    double plm;
    if (l == m) {
        plm = pmm;
    } else {
        double pm1 = x * (2 * m + 1) * pmm;
        if (l == m + 1) {
            plm = pm1;
        } else {
            double pm2 = pmm;
            plm = 0.0;
            for (int ll = m + 2; ll <= l; ++ll) {
                plm = ((2 * ll - 1) * x * pm1 - (ll + m - 1) * pm2) / (ll - m);
                pm2 = pm1;
                pm1 = plm;
            }
        }
    }
    if (m == 0) return plm;
    double norm = 2.0;
    for (int i = l - m + 1; i <= l + m; ++i) norm /= i;
    return std::sqrt(norm) * plm;
}

// rho0 + eps * P_l(cos theta) on an axisym grid; on full2d a fixed combination of the
// degree-l real harmonics with m = 0 and m = 2 whose total amplitude stays within eps.
// m = 1 modes are deliberately absent: their odd-in-theta sector behaves like a tilt of
// the symmetry axis, and finite differences across the pole lose an order of accuracy
// on exactly that sector. Even-m data keeps every pole-row quantity second order.
inline RadialGraph perturbed_sphere(const RoundGrid& grid, double rho0, double eps, int l) {
    if (l < 1) throw std::domain_error("perturbed_sphere: mode number must be >= 1");
    RadialGraph g;
    g.grid = grid;
    g.rho.resize(grid.node_count());
    if (grid.mode == GridMode::axisym) {
        for (std::size_t i = 0; i < g.rho.size(); ++i)
            g.rho[i] = rho0 + eps * legendre_p(l, std::cos(grid.theta[i]));
    } else {
        int lz = l, lt = l >= 2 ? l : 2;   // tesseral part needs degree >= 2
        for (int i = 0; i < grid.n_theta; ++i) {
            double x = std::cos(grid.theta[static_cast<std::size_t>(i)]);
            double p0 = legendre_p(lz, x);
            double p2 = schmidt_p(lt, 2, x);
            for (int j = 0; j < grid.n_lambda; ++j) {
                double lam = j * grid.dlambda;
                g.rho[static_cast<std::size_t>(i) * grid.n_lambda + j] =
                    rho0 + eps * (0.5 * p0 + 0.3 * p2 * std::cos(2.0 * lam)
                                  + 0.2 * p2 * std::sin(2.0 * lam));
            }
        }
    }
    validate_graph(g);
    return g;
}

// per-node derived geometry of a radial graph
struct GeometryFields {
    GridMode mode = GridMode::axisym;
    int n = 2;
    std::size_t nodes = 0;
    RoundGrid grid;
    std::vector<double> rho;
    std::vector<double> phi, phip;   // sin rho, cos rho
    std::vector<double> grad_sq;     // |grad rho|^2 in the round metric
    std::vector<double> W;           // sqrt(phi^2 + |grad rho|^2)
    std::vector<double> u;           // support function phi^2 / W
    std::vector<double> v;           // graph factor W / phi
    std::vector<double> kap1, kap2;  // axisym: profile and orbit curvature; full2d: both eigenvalues
    std::vector<double> sig;         // sigma_0..sigma_n per node, node-major
    std::vector<double> h11, h12, h22;  // second fundamental form, full2d only
    std::vector<double> dmu;         // area element times quadrature weight
    double min_kappa = 0.0;

    double sig_at(std::size_t node, int k) const {
        return sig[node * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k)];
    }

    // principal curvature spectrum at a node, orbit curvature repeated n-1 times
    void spectrum_at(std::size_t node, std::vector<double>& out) const {
        out.assign(static_cast<std::size_t>(n), kap2[node]);
        out[0] = kap1[node];
    }
};

namespace detail {

// read rho at (i, j) with parity ghosts: crossing a pole lands on the meridian
// half a turn away, so ghost rows are the mirrored row shifted by n_lambda/2
inline double at2d(const std::vector<double>& rho, const RoundGrid& g, int i, int j) {
    if (i < 0) { i = -1 - i; j += g.n_lambda / 2; }
    else if (i >= g.n_theta) { i = 2 * g.n_theta - 1 - i; j += g.n_lambda / 2; }
    j %= g.n_lambda;
    if (j < 0) j += g.n_lambda;
    return rho[static_cast<std::size_t>(i) * g.n_lambda + j];
}

inline double at1d(const std::vector<double>& rho, const RoundGrid& g, int i) {
    if (i < 0) i = -1 - i;
    else if (i >= g.n_theta) i = 2 * g.n_theta - 1 - i;
    return rho[static_cast<std::size_t>(i)];
}

} // namespace detail

inline GeometryFields compute_geometry(const RadialGraph& graph) {
    validate_graph(graph);
    const RoundGrid& grid = graph.grid;
    const int n = grid.n;
    GeometryFields f;
    f.mode = grid.mode;
    f.n = n;
    f.nodes = grid.node_count();
    f.grid = grid;
    f.rho = graph.rho;
    f.phi.resize(f.nodes); f.phip.resize(f.nodes); f.grad_sq.resize(f.nodes);
    f.W.resize(f.nodes); f.u.resize(f.nodes); f.v.resize(f.nodes);
    f.kap1.resize(f.nodes); f.kap2.resize(f.nodes);
    f.sig.resize(f.nodes * static_cast<std::size_t>(n + 1));
    f.dmu.resize(f.nodes);
    if (grid.mode == GridMode::full2d) { f.h11.resize(f.nodes); f.h12.resize(f.nodes); f.h22.resize(f.nodes); }

    const auto& rho = graph.rho;
    const double dt = grid.dtheta;

    if (grid.mode == GridMode::axisym) {
        parallel_for(f.nodes, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t idx = lo; idx < hi; ++idx) {
                int i = static_cast<int>(idx);
                double th = grid.theta[idx];
                double r = rho[idx];
                double rn = detail::at1d(rho, grid, i - 1);
                double rs = detail::at1d(rho, grid, i + 1);
                double r_t = (rs - rn) / (2.0 * dt);
                double r_tt = (rs - 2.0 * r + rn) / (dt * dt);

                double phi = std::sin(r), phip = std::cos(r);
                double gs = r_t * r_t;
                double Wv = std::sqrt(phi * phi + gs);
                double kp = (phi * phi * phip + 2.0 * phip * gs - phi * r_tt) / (Wv * Wv * Wv);
                double ko = (phip - r_t / (std::tan(th) * phi)) / Wv;

                f.phi[idx] = phi; f.phip[idx] = phip; f.grad_sq[idx] = gs;
                f.W[idx] = Wv; f.u[idx] = phi * phi / Wv; f.v[idx] = Wv / phi;
                f.kap1[idx] = kp; f.kap2[idx] = ko;

                // sigma_k of (kp, ko x (n-1)) in closed form
                f.sig[idx * static_cast<std::size_t>(n + 1)] = 1.0;
                double pwm = 1.0;  // ko^{k-1}
                for (int k = 1; k <= n; ++k) {
                    double ek = binom(n - 1, k) * pwm * ko + kp * binom(n - 1, k - 1) * pwm;
                    f.sig[idx * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(k)] = ek;
                    pwm *= ko;
                }

                f.dmu[idx] = grid.weight[idx] * std::pow(phi, n - 1) * Wv;
                if (!std::isfinite(f.dmu[idx]) || !std::isfinite(kp) || !std::isfinite(ko))
                    throw geometry_error(idx, "non-finite geometry");
            }
        });
    } else {
        const double dl = grid.dlambda;
        // first pass: longitude derivative as a node field, so the mixed covariant
        // term below can use the pole-regular form sin(theta) d/dtheta (rho_l / sin(theta))
        std::vector<double> rho_l_field(f.nodes);
        parallel_for(f.nodes, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t idx = lo; idx < hi; ++idx) {
                int i = static_cast<int>(idx) / grid.n_lambda;
                int j = static_cast<int>(idx) % grid.n_lambda;
                rho_l_field[idx] = (detail::at2d(rho, grid, i, j + 1) - detail::at2d(rho, grid, i, j - 1)) / (2.0 * dl);
            }
        });
        // signed sin(theta) at raw row index, valid for ghost rows: row -1 sits at
        // -dtheta/2, row n_theta at pi + dtheta/2, giving the right parity for
        // covector components continued across a pole
        auto sin_row = [&](int i) { return std::sin((i + 0.5) * dt); };
        parallel_for(f.nodes, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t idx = lo; idx < hi; ++idx) {
                int i = static_cast<int>(idx) / grid.n_lambda;
                int j = static_cast<int>(idx) % grid.n_lambda;
                double th = grid.theta[static_cast<std::size_t>(i)];
                double st = std::sin(th), ct = std::cos(th);

                double c = rho[idx];
                double rn = detail::at2d(rho, grid, i - 1, j);
                double rs = detail::at2d(rho, grid, i + 1, j);
                double rw = detail::at2d(rho, grid, i, j - 1);
                double re = detail::at2d(rho, grid, i, j + 1);
                double r_t = (rs - rn) / (2.0 * dt);
                double r_l = rho_l_field[idx];
                double r_tt = (rs - 2.0 * c + rn) / (dt * dt);
                double r_ll = (re - 2.0 * c + rw) / (dl * dl);

                // covariant hessian on round S^2; the theta-lambda component
                // rho_tl - cot(theta) rho_l is written so its error vanishes
                // like sin(theta) toward the poles
                double Htt = r_tt;
                double Htl = st *
                             (detail::at2d(rho_l_field, grid, i + 1, j) / sin_row(i + 1) -
                              detail::at2d(rho_l_field, grid, i - 1, j) / sin_row(i - 1)) /
                             (2.0 * dt);
                double Hll = r_ll + st * ct * r_t;

                double phi = std::sin(c), phip = std::cos(c);
                double gs = r_t * r_t + (r_l / st) * (r_l / st);
                double Wv = std::sqrt(phi * phi + gs);

                double h11 = (phi * phi * phip + 2.0 * phip * r_t * r_t - phi * Htt) / Wv;
                double h12 = (2.0 * phip * r_t * r_l - phi * Htl) / Wv;
                double h22 = (phi * phi * phip * st * st + 2.0 * phip * r_l * r_l - phi * Hll) / Wv;
                double g11 = phi * phi + r_t * r_t;
                double g12 = r_t * r_l;
                double g22 = phi * phi * st * st + r_l * r_l;

                // eigenvalues of g^{-1} h through the Cholesky factor of g
                double l11 = std::sqrt(g11);
                double l21 = g12 / l11;
                double l22 = std::sqrt(g22 - l21 * l21);
                double y11 = h11 / l11, y12 = h12 / l11;
                double y21 = (h12 - l21 * y11) / l22;
                double y22 = (h22 - l21 * y12) / l22;
                double b11 = y11 / l11;
                double b12 = (y12 - (l21 / l11) * y11) / l22;
                double b21 = y21 / l11;
                double b22 = (y22 - (l21 / l11) * y21) / l22;
                double off = 0.5 * (b12 + b21);
                double mean = 0.5 * (b11 + b22);
                double disc = std::sqrt(std::max(0.0, 0.25 * (b11 - b22) * (b11 - b22) + off * off));
                double k1 = mean - disc, k2 = mean + disc;

                f.phi[idx] = phi; f.phip[idx] = phip; f.grad_sq[idx] = gs;
                f.W[idx] = Wv; f.u[idx] = phi * phi / Wv; f.v[idx] = Wv / phi;
                f.kap1[idx] = k1; f.kap2[idx] = k2;
                f.h11[idx] = h11; f.h12[idx] = h12; f.h22[idx] = h22;
                f.sig[idx * 3] = 1.0;
                f.sig[idx * 3 + 1] = k1 + k2;
                f.sig[idx * 3 + 2] = k1 * k2;
                f.dmu[idx] = grid.weight[static_cast<std::size_t>(i)] * phi * Wv;
                if (!std::isfinite(f.dmu[idx]) || !std::isfinite(k1) || !std::isfinite(k2))
                    throw geometry_error(idx, "non-finite geometry");
            }
        });
    }

    double mk = f.kap1[0];
    for (std::size_t idx = 0; idx < f.nodes; ++idx)
        mk = std::min(mk, std::min(f.kap1[idx], f.kap2[idx]));
    f.min_kappa = mk;
    return f;
}

// fixed node order keeps results byte-identical across worker counts
inline double integrate(const GeometryFields& f, const std::vector<double>& field) {
    double total = 0.0;
    for (std::size_t i = 0; i < f.nodes; ++i) total += field[i] * f.dmu[i];
    return total;
}

inline double integrate_sigma(const GeometryFields& f, int k) {
    double total = 0.0;
    for (std::size_t i = 0; i < f.nodes; ++i) total += f.sig_at(i, k) * f.dmu[i];
    return total;
}

// (k+1) int sigma_{k+1} u - (n-k) int phi' sigma_k; vanishes on closed hypersurfaces
// up to discretization error, which makes it a quality gauge for the whole stack
inline double minkowski_residual(const GeometryFields& f, int k) {
    if (k < 0 || k > f.n - 1) throw std::domain_error("minkowski_residual: k out of range 0..n-1");
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < f.nodes; ++i) {
        lhs += f.sig_at(i, k + 1) * f.u[i] * f.dmu[i];
        rhs += f.phip[i] * f.sig_at(i, k) * f.dmu[i];
    }
    return (k + 1) * lhs - (f.n - k) * rhs;
}

// max over nodes of | grad u - h . grad Phi | in the induced metric, Phi = 1 - cos rho
inline double support_gradient_residual(const GeometryFields& f) {
    const RoundGrid& grid = f.grid;
    double worst = 0.0;
    if (f.mode == GridMode::axisym) {
        for (std::size_t idx = 0; idx < f.nodes; ++idx) {
            int i = static_cast<int>(idx);
            double du = (detail::at1d(f.u, grid, i + 1) - detail::at1d(f.u, grid, i - 1)) / (2.0 * grid.dtheta);
            double rn = detail::at1d(f.rho, grid, i - 1);
            double rs = detail::at1d(f.rho, grid, i + 1);
            double dPhi = (std::cos(rn) - std::cos(rs)) / (2.0 * grid.dtheta);
            double r = du - f.kap1[idx] * dPhi;  // theta is a principal direction here
            double g11 = f.phi[idx] * f.phi[idx] + f.grad_sq[idx];
            worst = std::max(worst, std::fabs(r) / std::sqrt(g11));
        }
    } else {
        std::vector<double> Phi(f.nodes);
        for (std::size_t idx = 0; idx < f.nodes; ++idx) Phi[idx] = 1.0 - f.phip[idx];
        for (std::size_t idx = 0; idx < f.nodes; ++idx) {
            int i = static_cast<int>(idx) / grid.n_lambda;
            int j = static_cast<int>(idx) % grid.n_lambda;
            double du_t = (detail::at2d(f.u, grid, i + 1, j) - detail::at2d(f.u, grid, i - 1, j)) / (2.0 * grid.dtheta);
            double du_l = (detail::at2d(f.u, grid, i, j + 1) - detail::at2d(f.u, grid, i, j - 1)) / (2.0 * grid.dlambda);
            double dP_t = (detail::at2d(Phi, grid, i + 1, j) - detail::at2d(Phi, grid, i - 1, j)) / (2.0 * grid.dtheta);
            double dP_l = (detail::at2d(Phi, grid, i, j + 1) - detail::at2d(Phi, grid, i, j - 1)) / (2.0 * grid.dlambda);

            double th = grid.theta[static_cast<std::size_t>(i)];
            double st = std::sin(th);
            double phi = f.phi[idx];
            double rho_t = (detail::at2d(f.rho, grid, i + 1, j) - detail::at2d(f.rho, grid, i - 1, j)) / (2.0 * grid.dtheta);
            double rho_l = (detail::at2d(f.rho, grid, i, j + 1) - detail::at2d(f.rho, grid, i, j - 1)) / (2.0 * grid.dlambda);
            double g11 = phi * phi + rho_t * rho_t;
            double g12 = rho_t * rho_l;
            double g22 = phi * phi * st * st + rho_l * rho_l;
            double det = g11 * g22 - g12 * g12;
            double gi11 = g22 / det, gi12 = -g12 / det, gi22 = g11 / det;
            // (h . grad Phi)_i = h_{im} g^{ml} dPhi_l
            double hp_t = f.h11[idx] * (gi11 * dP_t + gi12 * dP_l) + f.h12[idx] * (gi12 * dP_t + gi22 * dP_l);
            double hp_l = f.h12[idx] * (gi11 * dP_t + gi12 * dP_l) + f.h22[idx] * (gi12 * dP_t + gi22 * dP_l);
            double r_t = du_t - hp_t;
            double r_l = du_l - hp_l;
            double norm = std::sqrt(std::max(0.0, gi11 * r_t * r_t + 2.0 * gi12 * r_t * r_l + gi22 * r_l * r_l));
            worst = std::max(worst, norm);
        }
    }
    return worst;
}

} // namespace qf
