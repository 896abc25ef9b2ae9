#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semiclass/common.hpp"

namespace semiclass {

/// Smooth plateau window: 1 for dist <= inner, 0 for dist >= outer,
/// monotone smooth in between (flat at both ends).
inline double smooth_window(double dist, double inner, double outer) {
    if (dist <= inner) return 1.0;
    if (dist >= outer) return 0.0;
    return smooth_step((outer - dist) / (outer - inner));
}

namespace detail {

// Periodic natural cubic spline on uniform nodes; cyclic tridiagonal system
// solved with the Sherman-Morrison correction.
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    PeriodicSpline(std::vector<double> y, double period)
        : y_(std::move(y)), period_(period) {
        const int n = static_cast<int>(y_.size());
        if (n < 4) throw std::invalid_argument("spline: need at least 4 samples");
        if (!(period_ > 0.0)) throw std::invalid_argument("spline: bad period");
        h_ = period_ / n;
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) {
            const double ym = y_[(i + n - 1) % n], yp = y_[(i + 1) % n];
            rhs[i] = 6.0 * (yp - 2.0 * y_[i] + ym) / (h_ * h_);
        }
        m_ = solve_cyclic(rhs);
    }

    double operator()(double x) const {
        const int n = static_cast<int>(y_.size());
        double u = std::fmod(x, period_);
        if (u < 0) u += period_;
        int i = static_cast<int>(u / h_);
        if (i >= n) i = n - 1;
        const double th = (u - i * h_) / h_;
        const int j = (i + 1) % n;
        const double a = 1.0 - th;
        return a * y_[i] + th * y_[j] +
               (h_ * h_ / 6.0) *
                   ((a * a * a - a) * m_[i] + (th * th * th - th) * m_[j]);
    }

    double period() const { return period_; }

private:
    // Solves x[i-1] + 4 x[i] + x[i+1] = d[i] with periodic wraparound.
    std::vector<double> solve_cyclic(const std::vector<double>& d) const {
        const int n = static_cast<int>(d.size());
        const double b = 4.0, gamma = -b;
        std::vector<double> diag(n, b);
        diag[0] = b - gamma;
        diag[n - 1] = b - 1.0 / gamma;
        auto thomas = [&](const std::vector<double>& r) {
            std::vector<double> c(n), x(n);
            double beta = diag[0];
            x[0] = r[0] / beta;
            for (int i = 1; i < n; ++i) {
                c[i] = 1.0 / beta;
                beta = diag[i] - c[i];
                x[i] = (r[i] - x[i - 1]) / beta;
            }
            for (int i = n - 2; i >= 0; --i) x[i] -= c[i + 1] * x[i + 1];
            return x;
        };
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = 1.0;
        auto y = thomas(d);
        auto z = thomas(u);
        const double frac =
            (y[0] + y[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
        for (int i = 0; i < n; ++i) y[i] -= frac * z[i];
        return y;
    }

    std::vector<double> y_;
    std::vector<double> m_;
    double period_ = 0.0;
    double h_ = 0.0;
};

}  // namespace detail

struct PerturbationNone {};

struct PerturbationGaussian {
    double amplitude = 0.0;
    double center = 0.0;
    double width = 1.0;
};

struct PerturbationCosine {
    double amplitude = 0.0;
    int wavenumber = 1;
};

/// Finite cosine series sum_k amp_k cos(2 pi k x / L + phase_k); used to ship
/// profiles with a prescribed spectral envelope (finite-smoothness stand-ins).
struct PerturbationCosineSeries {
    struct Term {
        int k = 1;
        double amplitude = 0.0;
        double phase = 0.0;
    };
    std::vector<Term> terms;
};

/// amplitude * (1 - window): exactly zero on a plateau around `center`,
/// rising smoothly outside it. Keeps the speed constant on a chosen interval.
struct PerturbationPlateau {
    double amplitude = 0.0;
    double center = 0.0;
    double inner_radius = 0.5;
    double outer_radius = 1.0;
};

/// Tabulated samples of c itself on uniform nodes starting at x = 0;
/// interpolated by a periodic cubic spline. Out-of-band amplitudes are an
/// error at admissibility checking time, never clamped.
struct PerturbationTabulated {
    std::vector<double> x;
    std::vector<double> c;
    detail::PeriodicSpline spline;  // built on construction

    static PerturbationTabulated make(std::vector<double> xs,
                                      std::vector<double> cs) {
        if (xs.size() != cs.size() || xs.size() < 4)
            throw std::invalid_argument("tabulated profile: need >= 4 (x, c) rows");
        if (xs.front() != 0.0)
            throw std::invalid_argument("tabulated profile: x must start at 0");
        const double h = xs[1] - xs[0];
        for (std::size_t i = 1; i < xs.size(); ++i) {
            if (std::abs((xs[i] - xs[i - 1]) - h) > 1e-9 * std::max(1.0, h))
                throw std::invalid_argument("tabulated profile: non-uniform x");
        }
        const double period = h * static_cast<double>(xs.size());
        PerturbationTabulated p;
        p.x = std::move(xs);
        p.c = cs;
        p.spline = detail::PeriodicSpline(std::move(cs), period);
        return p;
    }

    double period() const { return spline.period(); }
};

using Perturbation =
    std::variant<PerturbationNone, PerturbationGaussian, PerturbationCosine,
                 PerturbationCosineSeries, PerturbationPlateau,
                 PerturbationTabulated>;

/**
 * Mixing-zone opening speed c(x): a baseline constant c0 plus a named
 * perturbation, together with the declared admissibility pair (c1, c2).
 * Evaluation is periodic with the caller's domain length.
 */
struct SpeedProfile {
    double c0 = 1.0;
    double c1 = 0.5;
    double c2 = 2.0;
    Perturbation perturbation = PerturbationNone{};

    static SpeedProfile constant(double c0, double c1, double c2) {
        return SpeedProfile{c0, c1, c2, PerturbationNone{}};
    }

    bool is_constant() const {
        return std::holds_alternative<PerturbationNone>(perturbation);
    }

    /// Declared pair constraint: 0 < c1 < c2 <= 2 and 1/c1 - 1/c2 <= 1.
    bool pair_admissible() const {
        return c1 > 0.0 && c1 < c2 && c2 <= 2.0 + 1e-15 &&
               (1.0 / c1 - 1.0 / c2) <= 1.0 + 1e-12;
    }

    double evaluate(double x, double period) const {
        return c0 + std::visit(
                        [&](const auto& p) -> double {
                            return eval_impl(p, x, period);
                        },
                        perturbation);
    }

    std::pair<double, double> range_on(double period, int samples = 4096) const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int k = 0; k < samples; ++k) {
            const double v = evaluate(k * period / samples, period);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }

    /// Strict pinching c1 < c(x) < c2 sampled on `samples` nodes.
    bool pinched_on(double period, int samples = 4096) const {
        auto [lo, hi] = range_on(period, samples);
        return lo > c1 && hi < c2;
    }

private:
    static double eval_impl(const PerturbationNone&, double, double) {
        return 0.0;
    }
    static double eval_impl(const PerturbationGaussian& p, double x,
                            double period) {
        const double d0 = wrap_centered(x - p.center, period);
        double acc = 0.0;
        for (int img = -8; img <= 8; ++img) {
            const double d = (d0 + img * period) / p.width;
            acc += std::exp(-d * d);
        }
        return p.amplitude * acc;
    }
    static double eval_impl(const PerturbationCosine& p, double x,
                            double period) {
        return p.amplitude * std::cos(kTwoPi * p.wavenumber * x / period);
    }
    static double eval_impl(const PerturbationCosineSeries& p, double x,
                            double period) {
        double acc = 0.0;
        for (const auto& t : p.terms)
            acc += t.amplitude * std::cos(kTwoPi * t.k * x / period + t.phase);
        return acc;
    }
    static double eval_impl(const PerturbationPlateau& p, double x,
                            double period) {
        const double d = std::abs(wrap_centered(x - p.center, period));
        return p.amplitude * (1.0 - smooth_window(d, p.inner_radius,
                                                  p.outer_radius));
    }
    double eval_impl(const PerturbationTabulated& p, double x,
                     double period) const {
        if (std::abs(period - p.period()) > 1e-9 * p.period())
            throw std::invalid_argument(
                "tabulated profile: evaluation period does not match the table");
        return p.spline(x) - c0;
    }

public:
    // --- serialization -----------------------------------------------------

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["c0"] = c0;
        j["c1"] = c1;
        j["c2"] = c2;
        j["perturbation"] = std::visit(
            [](const auto& p) { return pert_json(p); }, perturbation);
        return j;
    }

    static SpeedProfile from_json(const nlohmann::json& j) {
        SpeedProfile out;
        out.c0 = j.at("c0").get<double>();
        out.c1 = j.at("c1").get<double>();
        out.c2 = j.at("c2").get<double>();
        const auto& p = j.at("perturbation");
        const std::string type = p.at("type").get<std::string>();
        if (type == "none") {
            out.perturbation = PerturbationNone{};
        } else if (type == "gaussian") {
            out.perturbation = PerturbationGaussian{
                p.at("amplitude").get<double>(), p.at("center").get<double>(),
                p.at("width").get<double>()};
        } else if (type == "cosine") {
            out.perturbation = PerturbationCosine{
                p.at("amplitude").get<double>(), p.at("wavenumber").get<int>()};
        } else if (type == "cosine_series") {
            PerturbationCosineSeries cs;
            for (const auto& term : p.at("terms"))
                cs.terms.push_back({term.at("k").get<int>(),
                                    term.at("amplitude").get<double>(),
                                    term.value("phase", 0.0)});
            out.perturbation = std::move(cs);
        } else if (type == "plateau") {
            out.perturbation = PerturbationPlateau{
                p.at("amplitude").get<double>(), p.at("center").get<double>(),
                p.at("inner_radius").get<double>(),
                p.at("outer_radius").get<double>()};
        } else if (type == "tabulated") {
            out.perturbation = PerturbationTabulated::make(
                p.at("x").get<std::vector<double>>(),
                p.at("c").get<std::vector<double>>());
        } else {
            throw std::invalid_argument("unknown perturbation type: " + type);
        }
        return out;
    }

private:
    static nlohmann::json pert_json(const PerturbationNone&) {
        return {{"type", "none"}};
    }
    static nlohmann::json pert_json(const PerturbationGaussian& p) {
        return {{"type", "gaussian"},
                {"amplitude", p.amplitude},
                {"center", p.center},
                {"width", p.width}};
    }
    static nlohmann::json pert_json(const PerturbationCosine& p) {
        return {{"type", "cosine"},
                {"amplitude", p.amplitude},
                {"wavenumber", p.wavenumber}};
    }
    static nlohmann::json pert_json(const PerturbationCosineSeries& p) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : p.terms)
            terms.push_back(
                {{"k", t.k}, {"amplitude", t.amplitude}, {"phase", t.phase}});
        return {{"type", "cosine_series"}, {"terms", terms}};
    }
    static nlohmann::json pert_json(const PerturbationPlateau& p) {
        return {{"type", "plateau"},
                {"amplitude", p.amplitude},
                {"center", p.center},
                {"inner_radius", p.inner_radius},
                {"outer_radius", p.outer_radius}};
    }
    static nlohmann::json pert_json(const PerturbationTabulated& p) {
        return {{"type", "tabulated"}, {"x", p.x}, {"c", p.c}};
    }
};

/// Reads a two-column CSV (x, c) into a tabulated profile. Lines starting
/// with '#' are skipped; the separator may be a comma or whitespace.
inline SpeedProfile load_tabulated_profile(const std::string& path, double c0,
                                           double c1, double c2) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile table: " + path);
    std::vector<double> xs, cs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (auto& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream row(line);
        double x, c;
        if (row >> x >> c) {
            xs.push_back(x);
            cs.push_back(c);
        }
    }
    SpeedProfile out;
    out.c0 = c0;
    out.c1 = c1;
    out.c2 = c2;
    out.perturbation = PerturbationTabulated::make(std::move(xs), std::move(cs));
    return out;
}

/// Fixed-seed cosine series with |k|-power-law amplitudes; a stand-in for a
/// speed with W^{N,infinity}-type spectral tails inside the resolved band.
inline SpeedProfile make_rough_profile(double c0, double amplitude,
                                       double tail_exponent, int k_max,
                                       unsigned seed, double c1, double c2) {
    PerturbationCosineSeries cs;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    double norm = 0.0;
    for (int k = 1; k <= k_max; ++k) norm += std::pow(k, -tail_exponent);
    for (int k = 1; k <= k_max; ++k)
        cs.terms.push_back(
            {k, amplitude * std::pow(k, -tail_exponent) / norm, phase(rng)});
    return SpeedProfile{c0, c1, c2, std::move(cs)};
}

}  // namespace semiclass
