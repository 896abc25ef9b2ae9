#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace semiclass {

using Complex = std::complex<double>;

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap x into [-period/2, period/2).
inline double wrap_centered(double x, double period) {
    double y = std::fmod(x, period);
    if (y < -0.5 * period) y += period;
    if (y >= 0.5 * period) y -= period;
    return y;
}

/// Wrap an integer index into [0, n).
inline int wrap_index(long long k, int n) {
    long long r = k % n;
    if (r < 0) r += n;
    return static_cast<int>(r);
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// exp(-1/u) continued by 0 for u <= 0; the standard mollifier building block.
inline double mollifier_core(double u) {
    return u > 0.0 ? std::exp(-1.0 / u) : 0.0;
}

/// Smooth step: 0 for u <= 0, 1 for u >= 1, C^inf and flat at both ends.
inline double smooth_step(double u) {
    const double a = mollifier_core(u);
    const double b = mollifier_core(1.0 - u);
    return a / (a + b);
}

/// Simple blocked parallel for. Bodies must write disjoint state.
template <class F>
void parallel_for(std::size_t count, F&& body, unsigned max_threads = 0) {
    if (count == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned nt = max_threads == 0 ? hw : std::min(hw, max_threads);
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, count));
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (count + nt - 1) / nt;
    for (unsigned th = 0; th < nt; ++th) {
        const std::size_t lo = th * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace semiclass
