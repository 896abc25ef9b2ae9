#pragma once

#include <map>

#include "semiclass/admissibility.hpp"
#include "semiclass/quantize.hpp"

namespace semiclass {

struct InitialGaussian {
    double center = 0.0;
    double sigma = 1.0;
    double amplitude = 1.0;
};

/// amplitude * e^{2 pi i xi0 x} e^{-pi (x - x0)^2 / sigma^2}.
struct InitialWavePacket {
    double center = 0.0;
    double sigma = 1.0;
    double xi0 = 0.0;
    double amplitude = 1.0;
};

/// White noise restricted to modes mode_min <= |m| <= mode_max, fixed seed.
struct InitialNoiseBand {
    int mode_min = 0;
    int mode_max = 8;
    unsigned seed = 1;
    double amplitude = 1.0;
};

using InitialDataSpec =
    std::variant<InitialGaussian, InitialWavePacket, InitialNoiseBand,
                 GridFunction>;

inline GridFunction build_initial_data(const GridSpec& g,
                                       const InitialDataSpec& spec) {
    if (const auto* gauss = std::get_if<InitialGaussian>(&spec)) {
        return GridFunction::sample(g, [&](double x) {
            const double d = wrap_centered(x - gauss->center, g.period);
            return gauss->amplitude *
                   std::exp(-kPi * d * d / (gauss->sigma * gauss->sigma));
        });
    }
    if (const auto* wp = std::get_if<InitialWavePacket>(&spec)) {
        return GridFunction::sample(g, [&](double x) {
            const double d = wrap_centered(x - wp->center, g.period);
            return wp->amplitude *
                   std::exp(Complex(0.0, kTwoPi * wp->xi0 * x)) *
                   std::exp(-kPi * d * d / (wp->sigma * wp->sigma));
        });
    }
    if (const auto* nb = std::get_if<InitialNoiseBand>(&spec)) {
        std::mt19937_64 rng(nb->seed);
        std::normal_distribution<double> dist;
        SpectrumFunction F{g, Eigen::VectorXcd::Zero(g.n)};
        for (int i = 0; i < g.n; ++i) {
            const int m = std::abs(g.mode_of(i));
            if (m >= nb->mode_min && m <= nb->mode_max)
                F.coeffs[i] = nb->amplitude * Complex(dist(rng), dist(rng));
        }
        return inverse_transform(F);
    }
    const auto& f = std::get<GridFunction>(spec);
    require_same_grid(f.grid, g, "build_initial_data");
    return f;
}

enum class Stepper { rk4, exact_constant_c };

struct IvpConfig {
    GridSpec grid;
    SpeedProfile speed;
    double t_final = 1.0;
    Stepper stepper = Stepper::rk4;
    double theta = 0.1;  // CFL safety factor in (0, 1]
    InitialDataSpec initial_data = InitialGaussian{};
    std::vector<double> output_times;  // default: 41 uniform samples of [0, T]
    /// Reuse cached generator assemblies with linear interpolation in time,
    /// gated by a measured symbol error bound. Defaults on for n > 256.
    std::optional<bool> operator_cache;
    double cache_tolerance = 1e-8;

    std::vector<double> resolved_output_times() const {
        if (!output_times.empty()) return output_times;
        std::vector<double> ts;
        for (int i = 0; i <= 40; ++i) ts.push_back(t_final * i / 40.0);
        return ts;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<GridFunction> states;
    /// E(t) = || p^{-1}(x, tD) f(t) ||^2; NaN at t = 0 where the weight
    /// degenerates to the identity and the quantity is not tracked.
    std::vector<double> energies;

    long steps = 0;
    long assemblies = 0;
    long interpolations = 0;
    double max_interp_error = 0.0;
};

/// E(t) for a single state; t must be positive.
inline double energy(const GridFunction& f, const SpeedProfile& speed,
                     double t) {
    if (!(t > 0.0)) throw std::invalid_argument("energy: t must be positive");
    auto pinv = make_symbol_p_inv(speed, f.grid.period);
    const double nrm = l2_norm(apply_symbol_fft(pinv, t, f));
    return nrm * nrm;
}

/// Closed-form constant-speed propagator: multiplies each Fourier mode by
/// (1 + c t |xi|)^{1/c}. Exact up to roundoff.
inline GridFunction exact_constant_c(const GridFunction& f0, double c,
                                     double t) {
    if (!(c > 0.0))
        throw std::invalid_argument("exact_constant_c: c must be positive");
    auto F = forward_transform(f0);
    for (int i = 0; i < f0.grid.n; ++i) {
        const double xi = std::abs(f0.grid.freq_node(i));
        F.coeffs[i] *= std::exp(std::log1p(c * t * xi) / c);
    }
    return inverse_transform(F);
}

namespace detail {

// Memoized generator assembly with optional linear interpolation in time.
// Interpolation is used only when the sampled symbol error stays under the
// tolerance; every fallback is an exact assembly.
class GeneratorProvider {
public:
    GeneratorProvider(const SpeedProfile& speed, const GridSpec& grid,
                      bool allow_interpolation, double tolerance)
        : speed_(speed),
          grid_(grid),
          interpolate_(allow_interpolation),
          tol_(tolerance) {}

    const Eigen::MatrixXcd& at(double t, Trajectory& diag) {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        if (interpolate_) {
            auto hi = cache_.upper_bound(t);
            if (hi != cache_.end() && hi != cache_.begin()) {
                auto lo = std::prev(hi);
                const double err = symbol_interp_error(lo->first, hi->first, t);
                if (err <= tol_) {
                    const double th =
                        (t - lo->first) / (hi->first - lo->first);
                    Eigen::MatrixXcd lerp =
                        (1.0 - th) * lo->second + th * hi->second;
                    ++diag.interpolations;
                    diag.max_interp_error =
                        std::max(diag.max_interp_error, err);
                    return cache_.emplace(t, std::move(lerp)).first->second;
                }
            }
        }
        auto sym = make_symbol_d_t(speed_, grid_.period, t);
        auto op = quantize_canonical(sym, grid_);
        ++diag.assemblies;
        prune();
        return cache_.emplace(t, std::move(op.matrix)).first->second;
    }

private:
    double symbol_value(double x, double xi, double t) const {
        const double a = std::abs(xi);
        return a / (1.0 + speed_.evaluate(x, grid_.period) * t * a);
    }

    double symbol_interp_error(double t0, double t1, double t) const {
        const double th = (t - t0) / (t1 - t0);
        double worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double x = i * grid_.period / 8.0;
            for (int j = 1; j <= 8; ++j) {
                const double xi = grid_.xi_max() * j / 8.0;
                const double lerp = (1.0 - th) * symbol_value(x, xi, t0) +
                                    th * symbol_value(x, xi, t1);
                worst = std::max(worst,
                                 std::abs(lerp - symbol_value(x, xi, t)));
            }
        }
        return worst;
    }

    void prune() {
        while (cache_.size() > 8) cache_.erase(cache_.begin());
    }

    const SpeedProfile& speed_;
    GridSpec grid_;
    bool interpolate_;
    double tol_;
    std::map<double, Eigen::MatrixXcd> cache_;
};

}  // namespace detail

/**
 * Integrates d/dt f = d_t(x, D) f with classical RK4 and a CFL-style step
 * bound dt <= theta / sup_grid d_t, or with the exact constant-speed
 * propagator when the profile is constant. States are recorded at the
 * requested output times; energies at the positive ones.
 */
inline Trajectory solve(const IvpConfig& config) {
    if (!(config.t_final > 0.0 && config.t_final <= 1.0))
        throw std::invalid_argument("solve: t_final must lie in (0, 1]");
    if (!(config.theta > 0.0 && config.theta <= 1.0))
        throw std::invalid_argument("solve: theta must lie in (0, 1]");
    require_admissible(config.speed, config.grid);

    const auto& g = config.grid;
    auto outputs = config.resolved_output_times();
    std::sort(outputs.begin(), outputs.end());
    if (outputs.empty() || outputs.front() < 0.0 ||
        outputs.back() > config.t_final)
        throw std::invalid_argument("solve: output times must lie in [0, T]");

    GridFunction f = build_initial_data(g, config.initial_data);
    const double initial_norm = l2_norm(f);

    Trajectory traj;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(f);
        traj.energies.push_back(
            t > 0.0 ? energy(f, config.speed, t)
                    : std::numeric_limits<double>::quiet_NaN());
    };

    if (config.stepper == Stepper::exact_constant_c) {
        if (!config.speed.is_constant())
            throw std::invalid_argument(
                "solve: exact stepper requires a constant speed profile");
        const GridFunction f0 = f;
        for (double t : outputs) {
            f = exact_constant_c(f0, config.speed.c0, t);
            record(t);
        }
        return traj;
    }

    const auto [c_min, c_max] = config.speed.range_on(g.period);
    const bool use_cache =
        config.operator_cache.value_or(g.n > 256);
    detail::GeneratorProvider provider(config.speed, g, use_cache,
                                       config.cache_tolerance);

    auto step_bound = [&](double t) {
        const double sup = g.xi_max() / (1.0 + c_min * t * g.xi_max());
        return config.theta / sup;
    };

    double t = 0.0;
    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] <= 0.0) {
        record(0.0);
        ++next_out;
    }
    while (next_out < outputs.size()) {
        const double target = outputs[next_out];
        if (t >= target - 1e-14 * config.t_final) {
            record(target);
            ++next_out;
            continue;
        }
        const double h = std::min(step_bound(t), target - t);
        const auto& A1 = provider.at(t, traj);
        Eigen::VectorXcd k1 = A1 * f.values;
        const auto& A2 = provider.at(t + 0.5 * h, traj);
        Eigen::VectorXcd k2 = A2 * (f.values + 0.5 * h * k1);
        Eigen::VectorXcd k3 = A2 * (f.values + 0.5 * h * k2);
        const auto& A3 = provider.at(t + h, traj);
        Eigen::VectorXcd k4 = A3 * (f.values + h * k3);
        f.values += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        ++traj.steps;
        if (l2_norm(f) > 1e12 * std::max(initial_norm, 1e-300))
            throw std::runtime_error("solve: solution norm exceeded the "
                                     "blow-up guard (1e12 x initial)");
    }
    return traj;
}

/// Centered finite-difference samples of (d/dt) log E(t) over the recorded
/// trajectory (positive times only).
struct GrowthRates {
    std::vector<double> times;
    std::vector<double> rates;

    double max_rate() const {
        if (rates.empty()) throw std::logic_error("no growth rates recorded");
        return *std::max_element(rates.begin(), rates.end());
    }
    double max_abs_rate() const {
        double best = 0.0;
        for (double r : rates) best = std::max(best, std::abs(r));
        return best;
    }
};

/// Writes <path_base>.csv with (time, l2_norm, energy) rows and, when
/// requested, <path_base>_states.bin holding the states as consecutive
/// row-major complex pairs (little-endian float64).
inline void export_trajectory(const Trajectory& traj,
                              const std::string& path_base,
                              bool dump_states = false) {
    std::ofstream csv(path_base + ".csv");
    if (!csv)
        throw std::runtime_error("export_trajectory: cannot write " +
                                 path_base + ".csv");
    csv << "time,l2_norm,energy\n";
    char buf[120];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", traj.times[i],
                      l2_norm(traj.states[i]), traj.energies[i]);
        csv << buf;
    }
    if (!dump_states) return;
    std::ofstream bin(path_base + "_states.bin", std::ios::binary);
    for (const auto& state : traj.states) {
        for (int k = 0; k < state.grid.n; ++k) {
            const double re = state.values[k].real();
            const double im = state.values[k].imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
            bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    }
}

inline GrowthRates gronwall_rate(const Trajectory& traj) {
    std::vector<double> ts;
    std::vector<double> les;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] > 0.0 && std::isfinite(traj.energies[i]) &&
            traj.energies[i] > 0.0) {
            ts.push_back(traj.times[i]);
            les.push_back(std::log(traj.energies[i]));
        }
    }
    if (ts.size() < 3)
        throw std::invalid_argument(
            "gronwall_rate: need at least 3 positive-time energy samples");
    GrowthRates out;
    for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
        out.times.push_back(ts[i]);
        out.rates.push_back((les[i + 1] - les[i - 1]) /
                            (ts[i + 1] - ts[i - 1]));
    }
    return out;
}

}  // namespace semiclass
