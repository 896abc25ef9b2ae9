#include <random>

#include <catch_amalgamated.hpp>

#include "semiclass/evolution.hpp"

using namespace semiclass;

namespace {

SpeedProfile cosine_profile() {
    SpeedProfile p;
    p.c0 = 1.0;
    p.c1 = 0.85;
    p.c2 = 1.15;
    p.perturbation = PerturbationCosine{0.1, 1};
    return p;
}

IvpConfig base_config(int n, double L, double T) {
    IvpConfig cfg;
    cfg.grid = GridSpec::make(n, L);
    cfg.speed = SpeedProfile::constant(1.0, 0.9, 1.1);
    cfg.t_final = T;
    cfg.initial_data = InitialGaussian{L / 2.0, 1.0, 1.0};
    return cfg;
}

}  // namespace

TEST_CASE("zero data stays zero") {
    auto cfg = base_config(64, 16.0, 0.5);
    cfg.initial_data = GridFunction::zero(cfg.grid);
    auto traj = solve(cfg);
    for (const auto& s : traj.states) CHECK(l2_norm(s) == 0.0);
}

TEST_CASE("constant speed: single mode follows the closed-form gain") {
    auto cfg = base_config(64, 16.0, 1.0);
    const int m = 5;
    cfg.initial_data = GridFunction::sample(cfg.grid, [&](double x) {
        return std::exp(Complex(0.0, kTwoPi * m * x / cfg.grid.period));
    });
    auto traj = solve(cfg);
    const double xi = m / cfg.grid.period;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double gain = 1.0 + traj.times[i] * xi;  // c = 1
        auto expect = std::get<GridFunction>(cfg.initial_data).values * gain;
        REQUIRE((traj.states[i].values - expect).norm() <=
                1e-9 * expect.norm());
    }
}

TEST_CASE("rk4 matches the exact propagator") {
    // c = 1: the per-mode solution is linear in t and rk4 reproduces it to
    // roundoff; a fractional exponent leaves genuine truncation error.
    for (double c : {1.0, 0.7}) {
        auto cfg = base_config(128, 16.0, 1.0);
        cfg.speed = SpeedProfile::constant(c, 0.6, 1.2);
        auto traj = solve(cfg);
        const auto f0 = build_initial_data(cfg.grid, cfg.initial_data);
        auto exact = exact_constant_c(f0, c, cfg.t_final);
        const double rel =
            (traj.states.back().values - exact.values).norm() /
            exact.values.norm();
        REQUIRE(rel <= 1e-6);
    }
}

TEST_CASE("exact propagator basics and conservation") {
    const auto g = GridSpec::make(128, 16.0);
    auto f0 = build_initial_data(g, InitialGaussian{8.0, 1.0, 1.0});

    auto same = exact_constant_c(f0, 1.3, 0.0);
    CHECK((same.values - f0.values).norm() <= 1e-12 * f0.values.norm());

    const int m = 32;  // xi = 2 on L = 16
    auto mode = GridFunction::sample(g, [&](double x) {
        return std::exp(Complex(0.0, kTwoPi * m * x / g.period));
    });
    auto amplified = exact_constant_c(mode, 1.0, 1.0);
    CHECK((amplified.values - 3.0 * mode.values).norm() <=
          1e-11 * mode.values.norm());

    // E(t) = E(0+) along the exact flow.
    auto prof = SpeedProfile::constant(1.0, 0.9, 1.1);
    const double e_ref = energy(exact_constant_c(f0, 1.0, 0.1), prof, 0.1);
    for (double t : {0.1, 0.25, 0.5, 0.75, 1.0}) {
        const double e = energy(exact_constant_c(f0, 1.0, t), prof, t);
        REQUIRE(std::abs(e - e_ref) <= 1e-10 * e_ref);
    }
}

TEST_CASE("energy: zero data, multiplier agreement, grid stability") {
    const auto g = GridSpec::make(256, 16.0);
    auto prof = SpeedProfile::constant(1.0, 0.9, 1.1);
    CHECK(energy(GridFunction::zero(g), prof, 0.3) == 0.0);
    CHECK_THROWS_AS(energy(GridFunction::zero(g), prof, 0.0),
                    std::invalid_argument);

    // Constant speed: the quantized route equals the multiplier formula.
    auto f = build_initial_data(g, InitialWavePacket{8.0, 1.0, 2.0, 1.0});
    const double t = 0.4;
    auto F = forward_transform(f);
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double xi = std::abs(g.freq_node(i));
        const double w = std::exp(-std::log1p(t * xi));  // c = 1
        acc += w * w * std::norm(F.coeffs[i]);
    }
    const double direct = g.dxi() * acc;
    CHECK(energy(f, prof, t) == Catch::Approx(direct).epsilon(1e-10));

    // Variable speed: stable under grid doubling.
    auto vprof = cosine_profile();
    const auto g2 = GridSpec::make(512, 16.0);
    auto fine = build_initial_data(g2, InitialWavePacket{8.0, 1.0, 2.0, 1.0});
    const double e_coarse = energy(f, vprof, t);
    const double e_fine = energy(fine, vprof, t);
    CHECK(std::abs(e_fine - e_coarse) <= 1e-3 * e_fine);
}

TEST_CASE("growth rates: conservation, homogeneity, finiteness") {
    auto cfg = base_config(128, 16.0, 1.0);
    cfg.stepper = Stepper::exact_constant_c;
    auto traj = solve(cfg);
    auto rates = gronwall_rate(traj);
    CHECK(rates.max_abs_rate() <= 1e-6);

    // Doubling the data shifts log E by a constant; rates are unchanged.
    auto cfg2 = cfg;
    cfg2.initial_data = InitialGaussian{8.0, 1.0, 2.0};
    auto rates2 = gronwall_rate(solve(cfg2));
    for (std::size_t i = 0; i < rates.rates.size(); ++i)
        REQUIRE(std::abs(rates.rates[i] - rates2.rates[i]) < 1e-10);

    // Variable speed: finite rates over [T/10, T].
    auto vcfg = base_config(128, 16.0, 0.5);
    vcfg.speed = cosine_profile();
    auto vrates = gronwall_rate(solve(vcfg));
    CHECK(std::isfinite(vrates.max_rate()));
    CHECK(vrates.max_abs_rate() < 10.0);

    Trajectory tiny;
    tiny.times = {0.0, 0.1};
    tiny.states = {traj.states[0], traj.states[0]};
    tiny.energies = {std::numeric_limits<double>::quiet_NaN(), 1.0};
    CHECK_THROWS_AS(gronwall_rate(tiny), std::invalid_argument);
}

TEST_CASE("flow is linear in the data") {
    auto cfg = base_config(64, 16.0, 0.5);
    cfg.speed = cosine_profile();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    GridFunction f0{cfg.grid, Eigen::VectorXcd(cfg.grid.n)};
    GridFunction g0{cfg.grid, Eigen::VectorXcd(cfg.grid.n)};
    for (int k = 0; k < cfg.grid.n; ++k) {
        f0.values[k] = Complex(dist(rng), dist(rng));
        g0.values[k] = Complex(dist(rng), dist(rng));
    }
    const Complex a(0.7, -0.1), b(-0.3, 0.5);

    auto run = [&](const GridFunction& init) {
        auto c = cfg;
        c.initial_data = init;
        return solve(c);
    };
    auto tf = run(f0), tg = run(g0);
    GridFunction combo{cfg.grid, a * f0.values + b * g0.values};
    auto tc = run(combo);
    for (std::size_t i = 0; i < tc.times.size(); ++i) {
        Eigen::VectorXcd expect =
            a * tf.states[i].values + b * tg.states[i].values;
        REQUIRE((tc.states[i].values - expect).norm() <=
                1e-8 * std::max(1.0, expect.norm()));
    }
}

TEST_CASE("per-mode growth envelope and monotone regularity loss") {
    const auto g = GridSpec::make(128, 8.0);
    auto f0 = build_initial_data(g, InitialNoiseBand{0, 32, 5u, 1.0});
    const double c = 0.8, t = 1.0;
    auto ft = exact_constant_c(f0, c, t);
    auto F0 = forward_transform(f0);
    auto Ft = forward_transform(ft);
    for (int i = 0; i < g.n; ++i) {
        if (std::abs(F0.coeffs[i]) < 1e-12) continue;
        const double xi = std::abs(g.freq_node(i));
        const double gain = std::abs(Ft.coeffs[i] / F0.coeffs[i]);
        REQUIRE(gain == Catch::Approx(std::pow(1.0 + c * t * xi, 1.0 / c))
                            .epsilon(1e-10));
    }

    // Thinner mixing zones lose more regularity: the top-mode amplification
    // grows as the constant speed decreases.
    const double xi_top = g.xi_max();
    double prev = std::numeric_limits<double>::infinity();
    for (double cc : {0.5, 0.8, 1.2, 2.0}) {
        const double gain = std::pow(1.0 + cc * xi_top, 1.0 / cc);
        REQUIRE(gain < prev);
        prev = gain;
    }
}

TEST_CASE("config validation") {
    auto cfg = base_config(64, 16.0, 0.5);
    cfg.speed = SpeedProfile::constant(1.0, 1.0, 1.1);  // violates pinching
    CHECK_THROWS_AS(solve(cfg), std::invalid_argument);

    auto cfg2 = base_config(64, 16.0, 0.5);
    cfg2.stepper = Stepper::exact_constant_c;
    cfg2.speed = cosine_profile();  // not constant
    CHECK_THROWS_AS(solve(cfg2), std::invalid_argument);

    auto cfg3 = base_config(64, 16.0, 2.0);  // T > 1
    CHECK_THROWS_AS(solve(cfg3), std::invalid_argument);

    auto cfg4 = base_config(64, 16.0, 0.5);
    cfg4.output_times = {0.0, 0.6};  // beyond T
    CHECK_THROWS_AS(solve(cfg4), std::invalid_argument);
}

TEST_CASE("trajectory export") {
    auto cfg = base_config(64, 16.0, 0.5);
    auto traj = solve(cfg);
    export_trajectory(traj, "traj_tmp", true);
    {
        std::ifstream csv("traj_tmp.csv");
        REQUIRE(csv.good());
        std::string header;
        std::getline(csv, header);
        CHECK(header == "time,l2_norm,energy");
        int rows = 0;
        for (std::string l; std::getline(csv, l);) ++rows;
        CHECK(rows == static_cast<int>(traj.times.size()));
    }
    {
        std::ifstream bin("traj_tmp_states.bin",
                          std::ios::binary | std::ios::ate);
        REQUIRE(bin.good());
        CHECK(static_cast<long>(bin.tellg()) ==
              static_cast<long>(traj.states.size() * 64 * 2 * sizeof(double)));
    }
    std::remove("traj_tmp.csv");
    std::remove("traj_tmp_states.bin");
}

TEST_CASE("operator cache engages only within tolerance") {
    auto cfg = base_config(64, 16.0, 0.5);
    cfg.speed = cosine_profile();
    cfg.operator_cache = true;
    auto traj = solve(cfg);
    CHECK(traj.max_interp_error <= cfg.cache_tolerance);
    CHECK(traj.assemblies > 0);

    // Identical run without the cache agrees to solver accuracy.
    auto cfg2 = cfg;
    cfg2.operator_cache = false;
    auto traj2 = solve(cfg2);
    REQUIRE(traj.states.size() == traj2.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        REQUIRE((traj.states[i].values - traj2.states[i].values).norm() <=
                1e-7 * std::max(1.0, traj2.states[i].values.norm()));
}
