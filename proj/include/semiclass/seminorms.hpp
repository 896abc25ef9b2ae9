#pragma once

#include <vector>

#include "semiclass/norms.hpp"
#include "semiclass/symbols.hpp"

namespace semiclass {

namespace detail {

/// Finite-difference weights on the given nodes for the requested derivative
/// at 0 (Fornberg's recursion).
inline std::vector<double> fd_weights_at(const std::vector<double>& nodes,
                                         int deriv) {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::vector<double>> c(
        n, std::vector<double>(static_cast<std::size_t>(deriv) + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, deriv);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][deriv];
    return w;
}

/// Central stencil (offsets, weights/h^deriv) of the given accuracy order.
struct CentralStencil {
    int radius = 0;
    std::vector<double> weights;  // index 0 corresponds to offset -radius
};

inline CentralStencil central_stencil(int deriv, int accuracy) {
    if (deriv == 0) return CentralStencil{0, {1.0}};
    const int npts = 2 * ((deriv + 1) / 2) - 1 + accuracy;
    const int radius = (npts - 1) / 2;
    std::vector<double> nodes(npts);
    for (int i = 0; i < npts; ++i) nodes[i] = static_cast<double>(i - radius);
    return CentralStencil{radius, fd_weights_at(nodes, deriv)};
}

}  // namespace detail

/// Sampling box for seminorm estimation: nx periodic position nodes over one
/// period, nxi frequency nodes covering [-xi_max, xi_max] (made odd so that 0
/// is sampled), central differences of order fd_accuracy.
struct SeminormBox {
    double period = 1.0;
    int nx = 128;
    double xi_max = 64.0;
    int nxi = 513;
    int fd_accuracy = 4;
};

struct SeminormEstimate {
    char kind = 'M';  // 'M' (sup in x) or 'N' (Sobolev in x)
    double value = 0.0;
    double coarse_value = 0.0;
    bool converged = true;   // refinement changed the estimate by <= 5%
    bool diverged_mean = false;  // N only: non-vanishing x-mean detected

    // indices of the measured seminorm
    int deriv_x = 0;         // j (M)
    double sobolev_s = 0.0;  // s (N)
    int deriv_xi = 0;        // k
    double growth_m = 0.0;   // m

    // sampling metadata
    int nx = 0;
    int nxi = 0;
    double xi_max = 0.0;
    int fd_accuracy = 0;
    double period = 0.0;
};

namespace detail {

// Symbol samples on the position grid x extended frequency grid, with the
// xi range padded by the stencil radius so every core node has a full stencil.
struct SymbolTable {
    int nx = 0;
    int nxi_core = 0;
    int pad = 0;
    double hx = 0.0;
    double hxi = 0.0;
    double xi_lo = 0.0;  // first padded node
    Eigen::MatrixXcd values;  // (nx) x (nxi_core + 2*pad)

    double xi_core(int j) const { return xi_lo + (j + pad) * hxi; }
};

inline SymbolTable sample_symbol(const Symbol& a, const SeminormBox& box,
                                 int max_xi_deriv) {
    SymbolTable t;
    t.nx = box.nx;
    t.nxi_core = box.nxi % 2 == 0 ? box.nxi + 1 : box.nxi;
    t.hx = box.period / box.nx;
    t.hxi = 2.0 * box.xi_max / (t.nxi_core - 1);
    t.pad = max_xi_deriv > 0
                ? central_stencil(max_xi_deriv, box.fd_accuracy).radius
                : 0;
    t.xi_lo = -box.xi_max - t.pad * t.hxi;
    const int cols = t.nxi_core + 2 * t.pad;
    t.values.resize(t.nx, cols);
    parallel_for(static_cast<std::size_t>(t.nx), [&](std::size_t k) {
        const double x = static_cast<double>(k) * t.hx;
        for (int j = 0; j < cols; ++j)
            t.values(static_cast<Eigen::Index>(k), j) =
                a.eval(x, t.xi_lo + j * t.hxi);
    });
    return t;
}

// d^alpha/dx^alpha with periodic wraparound, then d^beta/dxi^beta on the
// padded table; returns the (nx) x (nxi_core) matrix of mixed differences.
inline Eigen::MatrixXcd mixed_difference(const SymbolTable& t, int alpha,
                                         int beta, int accuracy) {
    const int cols = static_cast<int>(t.values.cols());
    Eigen::MatrixXcd dx = t.values;
    if (alpha > 0) {
        const auto st = central_stencil(alpha, accuracy);
        const double scale = std::pow(t.hx, -alpha);
        dx.setZero();
        for (int k = 0; k < t.nx; ++k) {
            for (int o = -st.radius; o <= st.radius; ++o) {
                const double w = st.weights[o + st.radius];
                if (w == 0.0) continue;
                const int src = wrap_index(k + o, t.nx);
                dx.row(k) += (w * scale) * t.values.row(src);
            }
        }
    }
    if (beta == 0) return dx.middleCols(t.pad, t.nxi_core);
    const auto st = central_stencil(beta, accuracy);
    const double scale = std::pow(t.hxi, -beta);
    Eigen::MatrixXcd out(t.nx, t.nxi_core);
    out.setZero();
    for (int j = 0; j < t.nxi_core; ++j) {
        const int center = j + t.pad;
        for (int o = -st.radius; o <= st.radius; ++o) {
            const double w = st.weights[o + st.radius];
            if (w == 0.0) continue;
            const int src = center + o;
            if (src < 0 || src >= cols) continue;  // pad guarantees this holds
            out.col(j) += (w * scale) * t.values.col(src);
        }
    }
    return out;
}

inline double seminorm_M_once(const Symbol& a, int j, int k, double m,
                              const SeminormBox& box) {
    const auto table = sample_symbol(a, box, k);
    double best = 0.0;
    for (int alpha = 0; alpha <= j; ++alpha) {
        for (int beta = 0; beta <= k; ++beta) {
            const auto diff = mixed_difference(table, alpha, beta,
                                               box.fd_accuracy);
            for (int col = 0; col < table.nxi_core; ++col) {
                const double xi = table.xi_core(col);
                const double w = std::pow(1.0 + std::abs(xi), beta - m);
                const double colmax = diff.col(col).cwiseAbs().maxCoeff();
                best = std::max(best, w * colmax);
            }
        }
    }
    return best;
}

inline std::pair<double, bool> seminorm_N_once(const Symbol& a, double s,
                                               int k, double m,
                                               const SeminormBox& box) {
    SeminormBox b = box;
    if (!is_power_of_two(b.nx) || b.nx < 16)
        throw std::invalid_argument("seminorm_N: nx must be a power of two >= 16");
    const auto table = sample_symbol(a, b, k);
    const auto grid = GridSpec::make(b.nx, b.period);
    double best = 0.0;
    for (int beta = 0; beta <= k; ++beta) {
        const auto diff = mixed_difference(table, 0, beta, b.fd_accuracy);
        for (int col = 0; col < table.nxi_core; ++col) {
            const double xi = table.xi_core(col);
            GridFunction slice{grid, diff.col(col)};
            const double w = std::pow(1.0 + std::abs(xi), beta - m);
            best = std::max(best, w * hst_norm(slice, s, 1.0));
        }
    }
    // A symbol whose x-mean persists at the largest sampled |xi| is not an
    // x-decaying part; the caller should pass the oscillatory component.
    bool diverged = false;
    for (int col : {0, table.nxi_core - 1}) {
        const Eigen::VectorXcd slice = table.values.col(col + table.pad);
        const Complex mean = slice.mean();
        const double fluct =
            std::sqrt(grid.dx()) * (slice.array() - mean).matrix().norm();
        if (std::abs(mean) > std::max(0.5 * fluct, 1e-10)) diverged = true;
    }
    return {best, diverged};
}

}  // namespace detail

/**
 * Estimate of M^m_{j,k}(a): the sup over the sampling box of
 * (1 + |xi|)^{beta - m} |d_x^alpha d_xi^beta a| over alpha <= j, beta <= k,
 * with derivatives replaced by central differences. The estimate is repeated
 * at doubled resolution; a change above 5% is flagged as non-converged.
 */
inline SeminormEstimate seminorm_M(const Symbol& a, int j, int k, double m,
                                   const SeminormBox& box) {
    if (box.fd_accuracy < 4)
        throw std::invalid_argument("seminorm_M: stencil accuracy must be >= 4");
    SeminormBox fine = box;
    fine.nx *= 2;
    fine.nxi = 2 * box.nxi - 1;
    const double coarse = detail::seminorm_M_once(a, j, k, m, box);
    const double value = detail::seminorm_M_once(a, j, k, m, fine);
    SeminormEstimate est;
    est.kind = 'M';
    est.value = value;
    est.coarse_value = coarse;
    est.converged = std::abs(value - coarse) <= 0.05 * std::max(value, 1e-300);
    est.deriv_x = j;
    est.deriv_xi = k;
    est.growth_m = m;
    est.nx = fine.nx;
    est.nxi = fine.nxi;
    est.xi_max = box.xi_max;
    est.fd_accuracy = box.fd_accuracy;
    est.period = box.period;
    return est;
}

/**
 * Estimate of N^m_{s,k}(a): the sup over sampled xi of
 * (1 + |xi|)^{beta - m} || d_xi^beta a(., xi) ||_{H^s} for beta <= k, with the
 * discrete Sobolev norm taken spectrally in x over one period.
 */
inline SeminormEstimate seminorm_N(const Symbol& a, double s, int k, double m,
                                   const SeminormBox& box) {
    if (s < 0.0) throw std::invalid_argument("seminorm_N: s must be >= 0");
    SeminormBox fine = box;
    fine.nx *= 2;
    fine.nxi = 2 * box.nxi - 1;
    const auto [coarse, div_c] = detail::seminorm_N_once(a, s, k, m, box);
    const auto [value, div_f] = detail::seminorm_N_once(a, s, k, m, fine);
    SeminormEstimate est;
    est.kind = 'N';
    est.value = value;
    est.coarse_value = coarse;
    est.converged = std::abs(value - coarse) <= 0.05 * std::max(value, 1e-300);
    est.diverged_mean = div_c || div_f;
    est.sobolev_s = s;
    est.deriv_xi = k;
    est.growth_m = m;
    est.nx = fine.nx;
    est.nxi = fine.nxi;
    est.xi_max = box.xi_max;
    est.fd_accuracy = box.fd_accuracy;
    est.period = box.period;
    return est;
}

/// The symbol (x, xi) -> a(x, t*xi), used for scaling studies.
inline Symbol rescale_symbol(const Symbol& a, double t) {
    Symbol s = a;
    s.eval = [ea = a.eval, t](double x, double xi) { return ea(x, t * xi); };
    if (a.xi_support)
        s.xi_support = std::make_pair(a.xi_support->first / t,
                                      a.xi_support->second / t);
    return s;
}

}  // namespace semiclass
