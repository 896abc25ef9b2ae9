#pragma once

#include "semiclass/grid.hpp"

namespace semiclass {

/**
 * Semiclassical Sobolev weight at scale 1/t. The magnitude form
 * |1 + 2*pi*i*t*xi|^s = (1 + 4*pi^2 t^2 xi^2)^(s/2) enters norms; the
 * principal-branch complex power enters weight application so that
 * weighting by s and then by -s is the identity.
 */
struct SobolevWeight {
    double s = 0.0;
    double t = 1.0;

    double magnitude(double xi) const {
        const double u = kTwoPi * t * xi;
        return std::pow(1.0 + u * u, 0.5 * s);
    }
    Complex value(double xi) const {
        return std::pow(Complex(1.0, kTwoPi * t * xi), s);
    }
};

/// || f ||_{H^s_t} = (dxi * sum_m |1 + 2 pi i t xi_m|^{2s} |f_hat(xi_m)|^2)^(1/2).
inline double hst_norm(const GridFunction& f, double s, double t) {
    const auto F = forward_transform(f);
    const SobolevWeight w{s, t};
    double acc = 0.0;
    for (int i = 0; i < f.grid.n; ++i) {
        const double m = w.magnitude(f.grid.freq_node(i));
        acc += m * m * std::norm(F.coeffs[i]);
    }
    return std::sqrt(f.grid.dxi() * acc);
}

/// Fourier-diagonal application of (1 + 2 pi i t xi)^s.
inline GridFunction apply_weight(const GridFunction& f, double s, double t) {
    auto F = forward_transform(f);
    const SobolevWeight w{s, t};
    for (int i = 0; i < f.grid.n; ++i)
        F.coeffs[i] *= w.value(f.grid.freq_node(i));
    return inverse_transform(F);
}

}  // namespace semiclass
