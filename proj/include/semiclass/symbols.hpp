#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "semiclass/grid.hpp"
#include "semiclass/speed_profile.hpp"

namespace semiclass {

enum class SymbolLabel {
    d,
    p,
    p_inv,
    d_t,
    p_M,
    weight_s,
    bump,
    dyadic,
    product,
    custom
};

inline const char* to_string(SymbolLabel l) {
    switch (l) {
        case SymbolLabel::d: return "d";
        case SymbolLabel::p: return "p";
        case SymbolLabel::p_inv: return "p_inv";
        case SymbolLabel::d_t: return "d_t";
        case SymbolLabel::p_M: return "p_M";
        case SymbolLabel::weight_s: return "weight_s";
        case SymbolLabel::bump: return "bump";
        case SymbolLabel::dyadic: return "dyadic";
        case SymbolLabel::product: return "product";
        case SymbolLabel::custom: return "custom";
    }
    return "custom";
}

/**
 * An evaluable symbol a(x, xi) with a declared growth order m, meaning
 * |a(x, xi)| <= K (1 + |xi|)^m on sampled boxes for the recorded constant K.
 * Windows of xi carry their support interval so localized estimates can
 * record support distances and convex-hull lengths.
 */
struct Symbol {
    double order = 0.0;
    SymbolLabel label = SymbolLabel::custom;
    std::function<Complex(double, double)> eval;
    bool x_independent = false;
    bool xi_independent = false;
    /// For compactly supported xi-windows: closed convex hull of the support.
    std::optional<std::pair<double, double>> xi_support;
    /// Inner radius for annular supports {r <= |xi| <= R}; 0 when the
    /// support reaches the origin.
    double xi_support_inner = 0.0;
    /// Growth constant sampled at construction on a default box.
    double growth_constant = 0.0;

    Complex operator()(double x, double xi) const { return eval(x, xi); }
};

namespace detail {

inline double sample_growth_constant(
    const std::function<Complex(double, double)>& f, double order,
    double period) {
    double best = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double x = i * period / 64.0;
        for (double xi : {0.0, 0.5, 1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
            for (double sgn : {1.0, -1.0}) {
                const double w = std::pow(1.0 + std::abs(xi), -order);
                best = std::max(best, std::abs(f(x, sgn * xi)) * w);
            }
        }
    }
    return best;
}

inline Symbol finalize(Symbol s, double period) {
    s.growth_constant = sample_growth_constant(s.eval, s.order, period);
    return s;
}

inline void require_pinched(const SpeedProfile& c, double period,
                            const char* what) {
    if (!c.pair_admissible())
        throw std::invalid_argument(std::string(what) +
                                    ": declared pair (c1, c2) is not admissible");
    if (!c.pinched_on(period))
        throw std::invalid_argument(
            std::string(what) + ": speed leaves the declared band (c1, c2)");
}

}  // namespace detail

/// d(x, xi) = |xi| / (1 + c(x) |xi|): order 0, pinched between 0 and 1/c(x).
inline Symbol make_symbol_d(const SpeedProfile& c, double period) {
    detail::require_pinched(c, period, "make_symbol_d");
    Symbol s;
    s.order = 0.0;
    s.label = SymbolLabel::d;
    s.eval = [c, period](double x, double xi) -> Complex {
        const double a = std::abs(xi);
        return a / (1.0 + c.evaluate(x, period) * a);
    };
    return detail::finalize(std::move(s), period);
}

/// p(x, xi) = (1 + c(x)|xi|)^{1/c(x)}: order 1/c1.
inline Symbol make_symbol_p(const SpeedProfile& c, double period) {
    detail::require_pinched(c, period, "make_symbol_p");
    Symbol s;
    s.order = 1.0 / c.c1;
    s.label = SymbolLabel::p;
    s.eval = [c, period](double x, double xi) -> Complex {
        const double cv = c.evaluate(x, period);
        return std::exp(std::log1p(cv * std::abs(xi)) / cv);
    };
    return detail::finalize(std::move(s), period);
}

/// p^{-1}(x, xi) = (1 + c(x)|xi|)^{-1/c(x)}: order -1/c2, pointwise inverse of p.
inline Symbol make_symbol_p_inv(const SpeedProfile& c, double period) {
    detail::require_pinched(c, period, "make_symbol_p_inv");
    Symbol s;
    s.order = -1.0 / c.c2;
    s.label = SymbolLabel::p_inv;
    s.eval = [c, period](double x, double xi) -> Complex {
        const double cv = c.evaluate(x, period);
        return std::exp(-std::log1p(cv * std::abs(xi)) / cv);
    };
    return detail::finalize(std::move(s), period);
}

/// d_t(x, xi) = |xi| / (1 + c(x) t |xi|) = t^{-1} d(x, t xi); regular at t = 0
/// where it reduces to |xi|.
inline Symbol make_symbol_d_t(const SpeedProfile& c, double period, double t) {
    detail::require_pinched(c, period, "make_symbol_d_t");
    if (t < 0.0) throw std::invalid_argument("make_symbol_d_t: t must be >= 0");
    Symbol s;
    s.order = 1.0;
    s.label = SymbolLabel::d_t;
    s.eval = [c, period, t](double x, double xi) -> Complex {
        const double a = std::abs(xi);
        return a / (1.0 + c.evaluate(x, period) * t * a);
    };
    return detail::finalize(std::move(s), period);
}

/**
 * Interface symbol of the two-fluid porous-media model,
 * p_M(x, xi) = -(rho2 - rho1) |xi| / (1 + f'(x)^2), with the interface slope
 * supplied as grid samples (interpolated periodically off the nodes).
 */
inline Symbol make_symbol_p_M(std::pair<double, double> densities,
                              const GridFunction& interface_slope) {
    const auto [rho1, rho2] = densities;
    if (rho1 == rho2)
        throw std::invalid_argument(
            "make_symbol_p_M: equal densities make the symbol vanish "
            "identically; rejected rather than silently returned");
    const double period = interface_slope.grid.period;
    std::vector<double> slope(interface_slope.grid.n);
    for (int k = 0; k < interface_slope.grid.n; ++k)
        slope[k] = interface_slope.values[k].real();
    auto spline = std::make_shared<detail::PeriodicSpline>(slope, period);
    Symbol s;
    s.order = 1.0;
    s.label = SymbolLabel::p_M;
    s.eval = [spline, drho = rho2 - rho1](double x, double xi) -> Complex {
        const double fp = (*spline)(x);
        return -drho * std::abs(xi) / (1.0 + fp * fp);
    };
    return detail::finalize(std::move(s), period);
}

/// x-independent weight <xi>^s with <xi> = 1 + 2 pi i xi (principal branch).
inline Symbol make_weight(double s_exp) {
    Symbol s;
    s.order = s_exp;
    s.label = SymbolLabel::weight_s;
    s.x_independent = true;
    s.eval = [s_exp](double, double xi) -> Complex {
        return std::pow(Complex(1.0, kTwoPi * xi), s_exp);
    };
    return detail::finalize(std::move(s), 1.0);
}

namespace detail {

/// psi: 1 on |u| <= 1/2, 0 on |u| >= 1, smooth monotone radial in between.
inline double dyadic_psi(double u) {
    const double a = std::abs(u);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return smooth_step(2.0 * (1.0 - a));
}

}  // namespace detail

/**
 * Dyadic partition of unity phi_{-1} = psi, phi_j(xi) = phi(xi / 2^j) with
 * phi(u) = psi(u/2) - psi(u). The telescoping makes the sum identically 1 on
 * |xi| <= 2^{j_max} by construction. Supports: phi_{-1} in {|xi| < 1},
 * phi_j in {2^{j-1} <= |xi| <= 2^{j+1}}.
 */
inline std::vector<Symbol> make_dyadic_partition(int j_max) {
    if (j_max < 0)
        throw std::invalid_argument("make_dyadic_partition: j_max must be >= 0");
    std::vector<Symbol> out;
    {
        Symbol psi;
        psi.order = 0.0;
        psi.label = SymbolLabel::dyadic;
        psi.x_independent = true;
        psi.xi_support = std::make_pair(-1.0, 1.0);
        psi.eval = [](double, double xi) -> Complex {
            return detail::dyadic_psi(xi);
        };
        out.push_back(detail::finalize(std::move(psi), 1.0));
    }
    for (int j = 0; j <= j_max; ++j) {
        const double scale = std::pow(2.0, j);
        Symbol phi;
        phi.order = 0.0;
        phi.label = SymbolLabel::dyadic;
        phi.x_independent = true;
        phi.xi_support = std::make_pair(-2.0 * scale, 2.0 * scale);
        phi.xi_support_inner = 0.5 * scale;
        phi.eval = [scale](double, double xi) -> Complex {
            const double u = xi / scale;
            return detail::dyadic_psi(0.5 * u) - detail::dyadic_psi(u);
        };
        out.push_back(detail::finalize(std::move(phi), 1.0));
    }
    return out;
}

/// Distance from 0 to the support of a dyadic piece phi_j (0 for psi).
inline double dyadic_support_distance(int j) {
    return j < 0 ? 0.0 : std::pow(2.0, j - 1);
}

/**
 * Smooth bump in x: identically 1 on (x0 - eps/2, x0 + eps/2), supported in
 * (x0 - eps, x0 + eps), built from the standard exponential mollifier step.
 */
inline Symbol make_bump(double center, double radius, double period) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_bump: radius <= 0");
    if (radius > 0.5 * period)
        throw std::invalid_argument("make_bump: radius exceeds half the period");
    Symbol s;
    s.order = 0.0;
    s.label = SymbolLabel::bump;
    s.xi_independent = true;
    s.eval = [center, radius, period](double x, double) -> Complex {
        const double d = std::abs(wrap_centered(x - center, period));
        return smooth_window(d, 0.5 * radius, radius);
    };
    return detail::finalize(std::move(s), period);
}

/// Pointwise product of two symbols; declared order adds.
inline Symbol symbol_product(const Symbol& a, const Symbol& b,
                             SymbolLabel label = SymbolLabel::product) {
    Symbol s;
    s.order = a.order + b.order;
    s.label = label;
    s.x_independent = a.x_independent && b.x_independent;
    s.xi_independent = a.xi_independent && b.xi_independent;
    s.eval = [ea = a.eval, eb = b.eval](double x, double xi) {
        return ea(x, xi) * eb(x, xi);
    };
    s.growth_constant = a.growth_constant * b.growth_constant;
    return s;
}

/// a(x, xi) * <xi>^m; bookkeeping: order increases by m.
inline Symbol dagger_weight(const Symbol& a, double m) {
    if (m == 0.0) return a;
    return symbol_product(a, make_weight(m));
}

/**
 * Splits a symbol from the d / p / p^{-1} family into its x-frequency-zero
 * part Sigma0(xi) (the symbol evaluated with c frozen at the baseline c0)
 * and the remainder Pi = a - Sigma0, which carries all x-variation.
 */
inline std::pair<Symbol, Symbol> decompose_pi_sigma(const Symbol& a,
                                                    const SpeedProfile& c,
                                                    double period) {
    if (a.label != SymbolLabel::d && a.label != SymbolLabel::p &&
        a.label != SymbolLabel::p_inv)
        throw std::invalid_argument(
            "decompose_pi_sigma: supported only for the d / p / p_inv family");
    if (!(c.c0 > c.c1 && c.c0 < c.c2))
        throw std::invalid_argument(
            "decompose_pi_sigma: baseline c0 outside (c1, c2)");
    auto frozen = SpeedProfile::constant(c.c0, c.c1, c.c2);
    Symbol sigma0;
    switch (a.label) {
        case SymbolLabel::d: sigma0 = make_symbol_d(frozen, period); break;
        case SymbolLabel::p: sigma0 = make_symbol_p(frozen, period); break;
        default: sigma0 = make_symbol_p_inv(frozen, period); break;
    }
    sigma0.x_independent = true;
    Symbol pi;
    pi.order = a.order;
    pi.label = SymbolLabel::custom;
    pi.eval = [ea = a.eval, es = sigma0.eval](double x, double xi) {
        return ea(x, xi) - es(x, xi);
    };
    pi.growth_constant = a.growth_constant + sigma0.growth_constant;
    return {pi, sigma0};
}

}  // namespace semiclass
