#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qf {

inline constexpr double pi = 3.14159265358979323846264338327950288;

// volume of the unit ball in R^d
inline double unit_ball_volume(int d) {
    return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// measure of the round unit sphere S^n, i.e. the boundary of the unit ball in R^{n+1}
inline double sphere_measure(int n) {
    return (n + 1) * unit_ball_volume(n + 1);
}

// exact for the small indices used here: every intermediate is an integer below 2^53
inline double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline int worker_count() {
    if (const char* env = std::getenv("QF_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// chunked parallel map over [0, count); falls back to a plain loop for one worker.
// Reductions deliberately stay OUT of this helper: integrals are summed in fixed
// node order by the caller so results do not depend on the worker count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    int workers = worker_count();
    if (workers <= 1 || count < 4096) {
        body(0, count);
        return;
    }
    std::size_t nw = static_cast<std::size_t>(workers);
    if (nw > count) nw = count;
    std::vector<std::thread> pool;
    pool.reserve(nw);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::size_t chunk = (count + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace qf
