#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace semiclass {

/// Least-squares line with the coefficient of determination.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int points = 0;
};

inline FitResult linear_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    if (ys.size() != xs.size() || n < 2)
        throw std::invalid_argument("linear_fit: need >= 2 matching points");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate xs");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = n;
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
        const double e = ys[i] - (f.intercept + f.slope * xs[i]);
        ss_res += e * e;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

/// Fit of log(y) against log(x); slope is the scaling exponent.
inline FitResult loglog_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    lx.reserve(xs.size());
    ly.reserve(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("loglog_fit: needs positive data");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    return linear_fit(lx, ly);
}

/// Fit of log2(y) against an integer index (dyadic scales); the geometric
/// decay exponent is -slope.
inline FitResult dyadic_fit(const std::vector<double>& js,
                            const std::vector<double>& ys) {
    std::vector<double> ly;
    ly.reserve(ys.size());
    for (double y : ys) {
        if (!(y > 0.0))
            throw std::invalid_argument("dyadic_fit: needs positive data");
        ly.push_back(std::log2(y));
    }
    return linear_fit(js, ly);
}

}  // namespace semiclass
