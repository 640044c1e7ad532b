#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qf/common.hpp"

namespace qf {

// ordered list of principal curvatures at a point
struct Spectrum {
    std::vector<double> values;

    int n() const { return static_cast<int>(values.size()); }
};

struct singular_ratio_error : std::runtime_error {
    explicit singular_ratio_error(int k)
        : std::runtime_error("sigma_" + std::to_string(k) + " vanishes, ratio undefined") {}
};

// all elementary symmetric functions sigma_0..sigma_m of the entries, by the
// one-pass rolling recurrence: appending a root x maps e_j -> e_j + x e_{j-1}.
inline std::vector<double> sigma_all(const std::vector<double>& kappa, int m) {
    std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    int filled = 0;
    for (double x : kappa) {
        ++filled;
        int top = filled < m ? filled : m;
        for (int j = top; j >= 1; --j) e[j] += x * e[j - 1];
    }
    return e;
}

inline double sigma(int k, const Spectrum& s) {
    if (k < 0 || k > s.n()) throw std::domain_error("sigma: k out of range 0..n");
    if (k == 0) return 1.0;
    return sigma_all(s.values, k)[static_cast<std::size_t>(k)];
}

inline double sigma_ratio(int k, const Spectrum& s) {
    if (k < 0 || k > s.n() - 1) throw std::domain_error("sigma_ratio: k out of range 0..n-1");
    auto e = sigma_all(s.values, k + 1);
    if (e[static_cast<std::size_t>(k)] == 0.0) throw singular_ratio_error(k);
    return e[static_cast<std::size_t>(k) + 1] / e[static_cast<std::size_t>(k)];
}

inline bool in_gamma_cone(int k, const Spectrum& s) {
    if (k < 1 || k > s.n()) throw std::domain_error("in_gamma_cone: k out of range 1..n");
    auto e = sigma_all(s.values, k);
    for (int j = 1; j <= k; ++j)
        if (e[static_cast<std::size_t>(j)] <= 0.0) return false;
    return true;
}

// k(n-k) sigma_k^2 - (n-k+1)(k+1) sigma_{k-1} sigma_{k+1}; nonnegative on Gamma_k,
// zero exactly at isotropic spectra.
inline double newton_maclaurin_margin(int k, const Spectrum& s) {
    int n = s.n();
    if (k < 1 || k > n - 1) throw std::domain_error("newton_maclaurin_margin: k out of range 1..n-1");
    auto e = sigma_all(s.values, k + 1);
    double sk = e[static_cast<std::size_t>(k)];
    double skm = e[static_cast<std::size_t>(k) - 1];
    double skp = e[static_cast<std::size_t>(k) + 1];
    return k * (n - k) * sk * sk - (n - k + 1.0) * (k + 1.0) * skm * skp;
}

// sharp Maclaurin constant, normalized so c_nk * sigma_{k+1} <= sigma_k^{(k+1)/k}
// with equality at the identity spectrum: C(n,k)^{(k+1)/k} / C(n,k+1).
inline double c_nk(int n, int k) {
    if (k < 1 || k > n - 1) throw std::domain_error("c_nk: k out of range 1..n-1");
    return std::pow(binom(n, k), (k + 1.0) / k) / binom(n, k + 1);
}

// Gauss-Bonnet curvature: C(n,2k) (2k)! sum_{i=0}^{k} (-1)^i C(k,i)/C(n,2k-2i) sigma_{2k-2i}
inline double gauss_bonnet_Lk(int n, int k, const Spectrum& s) {
    if (s.n() != n) throw std::domain_error("gauss_bonnet_Lk: spectrum length differs from n");
    if (k < 0 || 2 * k > n) throw std::domain_error("gauss_bonnet_Lk: requires 0 <= 2k <= n");
    auto e = sigma_all(s.values, 2 * k);
    double fact2k = 1.0;
    for (int i = 2; i <= 2 * k; ++i) fact2k *= i;
    double sum = 0.0;
    double sign = 1.0;
    for (int i = 0; i <= k; ++i) {
        sum += sign * binom(k, i) / binom(n, 2 * k - 2 * i) * e[static_cast<std::size_t>(2 * (k - i))];
        sign = -sign;
    }
    return binom(n, 2 * k) * fact2k * sum;
}

// partial derivative of sigma_k with respect to one entry equals sigma_{k-1} of the
// others; computed by downdating: sigma_j(all but i) = sigma_j - kappa_i sigma_{j-1}(all but i).
// Used by the flow module to size explicit time steps.
inline std::vector<double> sigma_all_excluding(const std::vector<double>& e, double kappa_i, int m) {
    std::vector<double> r(static_cast<std::size_t>(m) + 1, 0.0);
    r[0] = 1.0;
    for (int j = 1; j <= m; ++j)
        r[static_cast<std::size_t>(j)] = e[static_cast<std::size_t>(j)] - kappa_i * r[static_cast<std::size_t>(j) - 1];
    return r;
}

} // namespace qf
