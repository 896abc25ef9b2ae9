#pragma once

#include <Eigen/Dense>

#include "semiclass/common.hpp"
#include "semiclass/fft.hpp"

namespace semiclass {

/**
 * Uniform periodic grid on [0, L) with n nodes (n a power of two) and the
 * matching frequency grid xi_m = m/L for m = -n/2 .. n/2-1.
 *
 * Spacings satisfy dx * dxi * n = 1 exactly, which makes the discrete
 * transform pair below a bijection and gives a discrete Parseval identity.
 */
struct GridSpec {
    int n = 0;
    double period = 0.0;

    static GridSpec make(int n, double period) {
        if (!is_power_of_two(n) || n < 16)
            throw std::invalid_argument("grid: n must be a power of two >= 16");
        if (!(period > 0.0))
            throw std::invalid_argument("grid: period must be positive");
        return GridSpec{n, period};
    }

    double dx() const { return period / n; }
    double dxi() const { return 1.0 / period; }

    /// Node x_k = k*L/n, k = 0..n-1.
    double x_node(int k) const { return k * dx(); }

    /// Frequency at ordered index i = 0..n-1, i.e. xi = (i - n/2)/L.
    double freq_node(int i) const { return (i - n / 2) * dxi(); }

    /// Signed mode number m = i - n/2 for ordered index i.
    int mode_of(int i) const { return i - n / 2; }

    /// Ordered index of signed mode m.
    int index_of(int m) const { return m + n / 2; }

    /// Largest resolved |frequency| (the unpaired node is -n/(2L)).
    double xi_max() const { return (n / 2) * dxi(); }

    bool operator==(const GridSpec& o) const {
        return n == o.n && period == o.period;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Complex samples f(x_k) on a GridSpec. Samples are complex even for real
/// data; several symbols in the library have genuinely complex values.
struct GridFunction {
    GridSpec grid;
    Eigen::VectorXcd values;

    static GridFunction zero(const GridSpec& g) {
        return GridFunction{g, Eigen::VectorXcd::Zero(g.n)};
    }

    template <class F>
    static GridFunction sample(const GridSpec& g, F&& f) {
        GridFunction out{g, Eigen::VectorXcd(g.n)};
        for (int k = 0; k < g.n; ++k) out.values[k] = f(g.x_node(k));
        return out;
    }
};

/// Fourier coefficients f_hat(xi_m), stored in physically ordered form
/// (m = -n/2 .. n/2-1).
struct SpectrumFunction {
    GridSpec grid;
    Eigen::VectorXcd coeffs;
};

/// f_hat(xi_m) = dx * sum_k f(x_k) exp(-2*pi*i x_k xi_m).
inline SpectrumFunction forward_transform(const GridFunction& f) {
    const int n = f.grid.n;
    if (f.values.size() != n)
        throw std::invalid_argument("forward_transform: bad sample count");
    Eigen::VectorXcd raw = fft::dft(f.values, -1);
    Eigen::VectorXcd ordered(n);
    const double dx = f.grid.dx();
    for (int i = 0; i < n; ++i) ordered[i] = dx * raw[(i + n / 2) % n];
    return SpectrumFunction{f.grid, ordered};
}

/// f(x_k) = dxi * sum_m f_hat(xi_m) exp(2*pi*i x_k xi_m); exact two-sided
/// inverse of forward_transform up to roundoff.
inline GridFunction inverse_transform(const SpectrumFunction& F) {
    const int n = F.grid.n;
    if (F.coeffs.size() != n)
        throw std::invalid_argument("inverse_transform: bad coefficient count");
    Eigen::VectorXcd raw(n);
    for (int i = 0; i < n; ++i) raw[(i + n / 2) % n] = F.coeffs[i];
    Eigen::VectorXcd values = fft::dft(raw, +1);
    values *= F.grid.dxi();
    return GridFunction{F.grid, values};
}

/// Discrete L2 norm (dx * sum |f|^2)^(1/2).
inline double l2_norm(const GridFunction& f) {
    return std::sqrt(f.grid.dx()) * f.values.norm();
}

/// Discrete L2 norm on the frequency side, (dxi * sum |f_hat|^2)^(1/2).
inline double l2_norm(const SpectrumFunction& F) {
    return std::sqrt(F.grid.dxi()) * F.coeffs.norm();
}

inline Complex inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f.grid, g.grid, "inner_product");
    return f.grid.dx() * g.values.dot(f.values);  // dot conjugates g
}

}  // namespace semiclass
