#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/common.hpp"

namespace qf {

enum class GridMode { axisym, full2d };

inline const char* grid_mode_name(GridMode m) { return m == GridMode::axisym ? "axisym" : "full2d"; }

inline GridMode grid_mode_from_name(const std::string& s) {
    if (s == "axisym") return GridMode::axisym;
    if (s == "full2d") return GridMode::full2d;
    throw std::invalid_argument("unknown grid mode: " + s);
}

// Cell-centered discretization of S^n. Colatitude nodes sit at (i+1/2) dtheta so the
// poles are never sampled; pole-side ghost values come from parity extension.
// full2d is the lat-long grid on S^2; axisym stores one polar profile for any n and
// carries the orbit measure |S^{n-1}| sin^{n-1}(theta) inside the node weights.
struct RoundGrid {
    GridMode mode = GridMode::axisym;
    int n = 2;
    int resolution = 0;   // node count per angular dimension
    int n_theta = 0;
    int n_lambda = 0;     // 0 in axisym mode
    double dtheta = 0.0;
    double dlambda = 0.0;
    std::vector<double> theta;    // size n_theta
    std::vector<double> weight;   // per theta row; full2d nodes in a row share it

    std::size_t node_count() const {
        return mode == GridMode::axisym ? theta.size()
                                        : theta.size() * static_cast<std::size_t>(n_lambda);
    }

    // quadrature weight of one node
    double node_weight(std::size_t node) const {
        if (mode == GridMode::axisym) return weight[node];
        return weight[node / static_cast<std::size_t>(n_lambda)];
    }

    double node_theta(std::size_t node) const {
        if (mode == GridMode::axisym) return theta[node];
        return theta[node / static_cast<std::size_t>(n_lambda)];
    }
};

inline RoundGrid build_grid(GridMode mode, int n, int resolution) {
    if (resolution < 16) throw std::domain_error("build_grid: resolution must be at least 16");
    if (mode == GridMode::full2d && n != 2) throw std::domain_error("build_grid: full2d supports n=2 only");
    if (mode == GridMode::axisym && n < 1) throw std::domain_error("build_grid: axisym requires n >= 1");

    RoundGrid g;
    g.mode = mode;
    g.n = n;
    g.resolution = resolution;
    g.n_theta = resolution;
    g.n_lambda = mode == GridMode::full2d ? 2 * resolution : 0;
    g.dtheta = pi / g.n_theta;
    g.dlambda = mode == GridMode::full2d ? 2.0 * pi / g.n_lambda : 0.0;

    g.theta.resize(static_cast<std::size_t>(g.n_theta));
    for (int i = 0; i < g.n_theta; ++i) g.theta[static_cast<std::size_t>(i)] = (i + 0.5) * g.dtheta;

    // Normalize the sin^{n-1} weights so they sum to |S^n| exactly. Midpoint weights
    // are already second order; the normalization removes the residual constant so
    // geodesic spheres integrate exactly and the equality cases below are clean.
    std::vector<double> raw(static_cast<std::size_t>(g.n_theta));
    double raw_sum = 0.0;
    for (int i = 0; i < g.n_theta; ++i) {
        raw[static_cast<std::size_t>(i)] = std::pow(std::sin(g.theta[static_cast<std::size_t>(i)]), n - 1);
        raw_sum += raw[static_cast<std::size_t>(i)];
    }
    double total = sphere_measure(n);
    double per_row = mode == GridMode::full2d ? total / g.n_lambda : total;
    g.weight.resize(static_cast<std::size_t>(g.n_theta));
    for (int i = 0; i < g.n_theta; ++i)
        g.weight[static_cast<std::size_t>(i)] = per_row * raw[static_cast<std::size_t>(i)] / raw_sum;
    return g;
}

} // namespace qf
