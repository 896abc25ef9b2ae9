#pragma once

#include "semiclass/quantize.hpp"

namespace semiclass {

/**
 * Specification of a semicommutator measurement:
 *   C_t(p1, p2) = p1(x,tD) p2(x,tD) - (p1 p2)(x,tD),
 * optionally localized near the frequency diagonal by a compactly supported
 * window phi acting on t(xi - eta). The window's support interval and the
 * convex hull I_phi = Conv(supp phi, {0}) are recorded for decay studies.
 */
struct CommutatorSpec {
    Symbol p1;
    Symbol p2;
    double t = 1.0;
    std::optional<Symbol> window;  // xi-only window with xi_support set

    double mu() const { return std::max({p1.order, p2.order, 0.0}); }

    /// dist(0, supp phi); 0 when the window covers the origin.
    double window_support_distance() const {
        const auto& sup = require_window();
        if (window->xi_support_inner > 0.0) return window->xi_support_inner;
        if (sup.first <= 0.0 && sup.second >= 0.0) return 0.0;
        return std::min(std::abs(sup.first), std::abs(sup.second));
    }

    /// |I_phi| with I_phi = Conv(supp phi union {0}).
    double window_interval_length() const {
        const auto& sup = require_window();
        return std::max(sup.second, 0.0) - std::min(sup.first, 0.0);
    }

private:
    const std::pair<double, double>& require_window() const {
        if (!window || !window->xi_support)
            throw std::logic_error(
                "commutator window metadata requires a window with xi_support");
        return *window->xi_support;
    }
};

/// C_t(p1, p2) as a dense operator: compose the two quantizations and
/// subtract the quantization of the pointwise product.
inline QuantizedOperator semicommutator(const CommutatorSpec& spec,
                                        const GridSpec& grid) {
    if (spec.t <= 0.0)
        throw std::invalid_argument("semicommutator: t must be in (0, 1]");
    const auto q1 = quantize_semiclassical(spec.p1, spec.t, grid);
    const auto q2 = quantize_semiclassical(spec.p2, spec.t, grid);
    const auto q12 =
        quantize_semiclassical(symbol_product(spec.p1, spec.p2), spec.t, grid);
    QuantizedOperator out;
    out.grid = grid;
    out.matrix = q1.matrix * q2.matrix - q12.matrix;
    out.mode = QuantMode::semiclassical;
    out.t = spec.t;
    out.symbol_label = "C_t(" + std::string(to_string(spec.p1.label)) + "," +
                       to_string(spec.p2.label) + ")";
    return out;
}

/**
 * Localized semicommutator. The kernel acting on the input spectrum is
 *   K(x_k, eta_m) = dxi * sum_xi e^{2 pi i x_k xi} phi(t(xi - eta_m))
 *                   (p1(x_k, t xi) - p1(x_k, t eta_m)) p2_hat(xi - eta_m; t eta_m),
 * where p2_hat(.; t eta) is the discrete x-transform of y -> p2(y, t eta).
 * The window argument uses the true frequency difference while p2_hat lives
 * on the wrapped difference index, which is the identification that makes
 * the dyadic pieces sum back to the unlocalized commutator exactly.
 */
inline QuantizedOperator localized_commutator(const CommutatorSpec& spec,
                                              const GridSpec& grid) {
    if (!spec.window)
        throw std::invalid_argument("localized_commutator: window required");
    if (spec.t <= 0.0)
        throw std::invalid_argument("localized_commutator: t must be in (0, 1]");
    if (grid.n > 1024)
        throw std::invalid_argument(
            "localized_commutator: kernel assembly is cubic in n; capped at "
            "n = 1024");
    const int n = grid.n;
    const double t = spec.t;
    const auto& phi = *spec.window;

    // Window values on all difference modes d = m_xi - m_eta (true values,
    // not wrapped); the in-band difference list keeps assembly at
    // O(n^2 * band) instead of O(n^3) for narrow windows.
    std::vector<Complex> phi_tab(2 * n - 1);
    std::vector<int> band;
    for (int d = -(n - 1); d <= n - 1; ++d) {
        const Complex v = phi.eval(0.0, t * d * grid.dxi());
        phi_tab[d + n - 1] = v;
        if (std::abs(v) > 0.0) band.push_back(d);
    }

    // p1 sampled at (x_k, t xi_i), ordered frequency index.
    Eigen::MatrixXcd P1(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        for (int i = 0; i < n; ++i)
            P1(static_cast<Eigen::Index>(k), i) =
                spec.p1.eval(grid.x_node(static_cast<int>(k)),
                             t * grid.freq_node(i));
    });

    // p2_hat(delta; t eta): column eta, wrapped difference index delta.
    Eigen::MatrixXcd P2hat(n, n);
    for (int e = 0; e < n; ++e) {
        Eigen::VectorXcd col(n);
        const double teta = t * grid.freq_node(e);
        for (int k = 0; k < n; ++k)
            col[k] = spec.p2.eval(grid.x_node(k), teta);
        P2hat.col(e) = grid.dx() * fft::dft(col, -1);
    }

    const detail::PhaseTable phase(n);
    Eigen::MatrixXcd K(n, n);  // (x_k, eta index)
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        for (int e = 0; e < n; ++e) {
            Complex acc = 0.0;
            const Complex p1_eta = P1(k, e);
            for (int d : band) {
                const int i = e + d;
                if (i < 0 || i >= n) continue;
                const int m_xi = grid.mode_of(i);
                acc += phi_tab[d + n - 1] * (P1(k, i) - p1_eta) *
                       P2hat(wrap_index(d, n), e) * phase(k, m_xi);
            }
            K(k, e) = grid.dxi() * acc;
        }
    });

    // Operator on grid functions: A[k, l] = dxi * sum_e K(k, e) dx e^{-2 pi i x_l eta_e}.
    Eigen::MatrixXcd A(n, n);
    const double scale = grid.dx() * grid.dxi();
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd raw(n);
        for (int e = 0; e < n; ++e) raw[(e + n / 2) % n] = K(k, e);
        A.row(k) = (scale * fft::dft(raw, -1)).transpose();
    }

    QuantizedOperator out;
    out.grid = grid;
    out.matrix = std::move(A);
    out.mode = QuantMode::semiclassical;
    out.t = t;
    out.symbol_label = "C_t_phi(" + std::string(to_string(spec.p1.label)) +
                       "," + to_string(spec.p2.label) + ")";
    return out;
}

/// Two-variable array Gamma^{+-}(y, eta) = dx * sum_z e^{-/+ 2 pi i eta z}
/// gamma(y -/+ z) f(z), assembled by one periodic convolution per frequency.
struct Gamma2D {
    GridSpec grid;
    int sign = +1;
    Eigen::MatrixXcd values;  // rows: y nodes, cols: ordered eta index
};

/// The default window 1 / (1 + 2 pi i w), sampled on centered periodic
/// differences (periodized truncation of the line profile).
inline std::function<Complex(double)> default_gamma_window() {
    return [](double w) { return 1.0 / Complex(1.0, kTwoPi * w); };
}

inline Gamma2D gamma_transform(const GridFunction& f,
                               const std::function<Complex(double)>& gamma,
                               int sign) {
    if (sign != +1 && sign != -1)
        throw std::invalid_argument("gamma_transform: sign must be +1 or -1");
    const auto& g = f.grid;
    const int n = g.n;

    // gamma on the periodic difference set, as a grid function.
    GridFunction gam{g, Eigen::VectorXcd(n)};
    for (int k = 0; k < n; ++k)
        gam.values[k] = gamma(wrap_centered(g.x_node(k), g.period));
    const auto gam_hat = forward_transform(gam);

    // Gamma^-_{f,gamma} = Gamma^+_{f~,gamma} with f~(z) = f(-z).
    GridFunction fin = f;
    if (sign < 0) {
        for (int k = 0; k < n; ++k)
            fin.values[k] = f.values[(n - k) % n];
    }

    Gamma2D out{g, sign, Eigen::MatrixXcd(n, n)};
    for (int e = 0; e < n; ++e) {
        const double eta = g.freq_node(e);
        GridFunction mod{g, Eigen::VectorXcd(n)};
        for (int k = 0; k < n; ++k)
            mod.values[k] = fin.values[k] *
                            std::exp(Complex(0.0, -kTwoPi * eta * g.x_node(k)));
        auto mod_hat = forward_transform(mod);
        for (int i = 0; i < n; ++i) mod_hat.coeffs[i] *= gam_hat.coeffs[i];
        out.values.col(e) = inverse_transform(mod_hat).values;
    }
    return out;
}

/// L2 norm over both variables, dx in y and dxi in eta.
inline double gamma_two_norm(const Gamma2D& G) {
    return std::sqrt(G.grid.dx() * G.grid.dxi()) * G.values.norm();
}

/// Spectral d/dy applied column-wise.
inline Gamma2D gamma_y_derivative(const Gamma2D& G) {
    Gamma2D out = G;
    for (int e = 0; e < G.grid.n; ++e) {
        GridFunction col{G.grid, G.values.col(e)};
        auto hat = forward_transform(col);
        for (int i = 0; i < G.grid.n; ++i)
            hat.coeffs[i] *= Complex(0.0, kTwoPi * G.grid.freq_node(i));
        out.values.col(e) = inverse_transform(hat).values;
    }
    return out;
}

/**
 * Both sides of the synthesis bound: for Q(x, xi) on the grid box,
 *   lhs = || A_Q ||_{L2},  A_Q(x) = dxi * sum_m e^{2 pi i x xi_m} Q(x, xi_m),
 *   rhs = || (1 - d/dx) Q ||_{L2(x,xi)}   (spectral x-derivative).
 * Returned as a pair so constants can be tracked empirically.
 */
inline std::pair<double, double> duality_bound_check(
    const GridSpec& g, const Eigen::MatrixXcd& Q) {
    const int n = g.n;
    if (Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("duality_bound_check: Q must be n x n");
    const detail::PhaseTable phase(n);
    GridFunction aq = GridFunction::zero(g);
    for (int k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i) acc += Q(k, i) * phase(k, g.mode_of(i));
        aq.values[k] = g.dxi() * acc;
    }
    const double lhs = l2_norm(aq);

    double rhs_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        GridFunction col{g, Q.col(i)};
        auto hat = forward_transform(col);
        for (int j = 0; j < n; ++j)
            hat.coeffs[j] *= Complex(1.0, -kTwoPi * g.freq_node(j));
        const double nrm = l2_norm(SpectrumFunction{g, hat.coeffs});
        rhs_sq += g.dxi() * nrm * nrm;
    }
    return {lhs, std::sqrt(rhs_sq)};
}

}  // namespace semiclass
