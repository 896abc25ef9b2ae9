#pragma once

#include <string>

#include "semiclass/seminorms.hpp"

namespace semiclass {

/// Smallest integer N with N > 3/2 + 1/c1 and N >= 1 + ceil(1/c1).
inline int required_wn_order(double c1) {
    const double m1 = 1.0 / c1;
    const int from_strict = static_cast<int>(std::floor(1.5 + m1)) + 1;
    const int from_ceil = 1 + static_cast<int>(std::ceil(m1 - 1e-12));
    return std::max(from_strict, from_ceil);
}

/// Smallest workable Sobolev index with s > 3/2 + 1/c1 and s >= 1 + ceil(1/c1)
/// (the strict inequality is realized with a fixed small margin).
inline double required_sobolev_index(double c1) {
    const double m1 = 1.0 / c1;
    return std::max(1.5 + m1 + 0.01,
                    static_cast<double>(1 + static_cast<int>(std::ceil(m1 - 1e-12))));
}

struct DerivativeEstimate {
    int order = 0;
    double sup = 0.0;
    double coarse_sup = 0.0;
    bool converged = true;
};

/**
 * Numerical evidence for admissibility of a speed profile: the exact nodal
 * pinching check, finite-difference sup-norm estimates of derivatives (the
 * W^{N,inf} route), and discrete Sobolev norms of v1 = c - c0 and
 * v2 = 1/c - 1/c0 (the H^s route). The analytic conditions are infinite-
 * dimensional; this report records finite proxies plus their convergence
 * under grid refinement, as evidence rather than proof.
 */
struct AdmissibilityReport {
    bool pair_ok = false;    // 0 < c1 < c2 <= 2 and 1/c1 - 1/c2 <= 1
    bool c1_c2_check = false;  // strict nodal pinching c1 < c(x) < c2
    double c_min = 0.0;
    double c_max = 0.0;

    int n_required = 0;
    double s_required = 0.0;

    std::vector<DerivativeEstimate> derivative_seminorms;  // orders 1..n_required
    bool c2_supported = false;

    double v1_hs = 0.0;
    double v2_hs = 0.0;
    bool sobolev_converged = false;
    bool c2prime_supported = false;

    std::string verdict;  // "C2", "C2'", "C2+C2'", or "none"

    bool admissible() const { return pair_ok && c1_c2_check && verdict != "none"; }
};

namespace detail {

inline double derivative_sup(const SpeedProfile& c, double period, int order,
                             int samples, int accuracy) {
    const auto st = central_stencil(order, accuracy);
    const double h = period / samples;
    double best = 0.0;
    for (int k = 0; k < samples; ++k) {
        double acc = 0.0;
        for (int o = -st.radius; o <= st.radius; ++o)
            acc += st.weights[o + st.radius] *
                   c.evaluate((k + o) * h, period);
        best = std::max(best, std::abs(acc) / std::pow(h, order));
    }
    return best;
}

}  // namespace detail

inline AdmissibilityReport check_admissible(const SpeedProfile& c,
                                            const GridSpec& grid) {
    AdmissibilityReport rep;
    rep.pair_ok = c.pair_admissible();
    auto [lo, hi] = c.range_on(grid.period, grid.n);
    rep.c_min = lo;
    rep.c_max = hi;
    rep.c1_c2_check = lo > c.c1 && hi < c.c2;
    rep.n_required = required_wn_order(c.c1);
    rep.s_required = required_sobolev_index(c.c1);

    // (C2): finite-difference sup norms of c up to order N, refined once.
    bool c2_ok = true;
    for (int order = 1; order <= rep.n_required; ++order) {
        DerivativeEstimate d;
        d.order = order;
        d.coarse_sup = detail::derivative_sup(c, grid.period, order, grid.n, 4);
        d.sup = detail::derivative_sup(c, grid.period, order, 2 * grid.n, 4);
        // Estimates at the roundoff floor are converged zeros.
        const double scale = std::max(std::abs(d.sup), 1e-7);
        d.converged = std::abs(d.sup - d.coarse_sup) <= 0.05 * scale;
        if (!d.converged || !std::isfinite(d.sup)) c2_ok = false;
        rep.derivative_seminorms.push_back(d);
    }
    rep.c2_supported = c2_ok;

    // (C2'): discrete H^s norms of v = (c - c0, 1/c - 1/c0), refined once.
    if (c.c0 > c.c1 && c.c0 < c.c2) {
        auto v_norms = [&](int n) {
            const auto g = GridSpec::make(n, grid.period);
            auto v1 = GridFunction::sample(g, [&](double x) {
                return c.evaluate(x, grid.period) - c.c0;
            });
            auto v2 = GridFunction::sample(g, [&](double x) {
                return 1.0 / c.evaluate(x, grid.period) - 1.0 / c.c0;
            });
            return std::make_pair(hst_norm(v1, rep.s_required, 1.0),
                                  hst_norm(v2, rep.s_required, 1.0));
        };
        const auto coarse = v_norms(grid.n);
        const auto fine = v_norms(2 * grid.n);
        rep.v1_hs = fine.first;
        rep.v2_hs = fine.second;
        const double s1 = std::max(fine.first, 1e-12);
        const double s2 = std::max(fine.second, 1e-12);
        rep.sobolev_converged =
            std::abs(fine.first - coarse.first) <= 0.05 * s1 &&
            std::abs(fine.second - coarse.second) <= 0.05 * s2;
        rep.c2prime_supported = rep.sobolev_converged &&
                                std::isfinite(fine.first) &&
                                std::isfinite(fine.second);
    }

    if (rep.c2_supported && rep.c2prime_supported) rep.verdict = "C2+C2'";
    else if (rep.c2_supported) rep.verdict = "C2";
    else if (rep.c2prime_supported) rep.verdict = "C2'";
    else rep.verdict = "none";
    return rep;
}

/// Gate used before any computation: throws unless the pair constraint and
/// the strict pinching both hold on the grid nodes.
inline void require_admissible(const SpeedProfile& c, const GridSpec& grid) {
    if (!c.pair_admissible())
        throw std::invalid_argument(
            "speed profile: pair (c1, c2) violates 0 < c1 < c2 <= 2, "
            "1/c1 - 1/c2 <= 1");
    auto [lo, hi] = c.range_on(grid.period, grid.n);
    if (!(lo > c.c1 && hi < c.c2))
        throw std::invalid_argument(
            "speed profile: c(x) leaves the declared band (c1, c2) on the grid");
}

}  // namespace semiclass
