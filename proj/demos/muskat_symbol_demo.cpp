// Quantizes the two-fluid interface symbol for a sampled interface slope and
// prints how it damps or amplifies a few Fourier modes in each density
// ordering.

#include <cstdio>

#include "semiclass/quantize.hpp"

using namespace semiclass;

int main() {
    const auto g = GridSpec::make(256, 8.0);

    // Interface slope f'(x): a localized ripple on a flat interface.
    auto slope = GridFunction::sample(g, [&](double x) {
        const double d = wrap_centered(x - 4.0, g.period);
        return 0.8 * std::exp(-d * d) * std::sin(kTwoPi * x / g.period);
    });

    std::printf("two-fluid interface symbol on n=%d, L=%g\n", g.n, g.period);
    for (auto [rho1, rho2] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
        auto sym = make_symbol_p_M({rho1, rho2}, slope);
        auto op = quantize_canonical(sym, g);
        std::printf("\n  rho1=%g rho2=%g (%s stratification)\n", rho1, rho2,
                    rho2 > rho1 ? "stable" : "unstable");
        std::printf("  %8s %14s %14s\n", "mode", "symbol(x=4)", "op gain");
        for (int m : {1, 4, 16, 64}) {
            auto mode = GridFunction::sample(g, [&](double x) {
                return std::exp(Complex(0.0, kTwoPi * m * x / g.period));
            });
            const double gain = l2_norm(apply(op, mode)) / l2_norm(mode);
            std::printf("  %8d %14.5f %14.5f\n", m,
                        sym(4.0, m / g.period).real(), gain);
        }
    }
    std::printf("\nsign convention: the symbol is negative (damping) when the "
                "denser fluid sits below.\n");
    return 0;
}
