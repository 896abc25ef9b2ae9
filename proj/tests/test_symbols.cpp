#include <random>

#include <catch_amalgamated.hpp>

#include "semiclass/admissibility.hpp"
#include "semiclass/seminorms.hpp"
#include "semiclass/symbols.hpp"

using namespace semiclass;

namespace {

SpeedProfile cosine_profile(double c0 = 1.0, double amp = 0.1,
                            double c1 = 0.85, double c2 = 1.15) {
    SpeedProfile p;
    p.c0 = c0;
    p.c1 = c1;
    p.c2 = c2;
    p.perturbation = PerturbationCosine{amp, 1};
    return p;
}

SpeedProfile gaussian_profile() {
    SpeedProfile p;
    p.c0 = 1.0;
    p.c1 = 0.85;
    p.c2 = 1.25;
    p.perturbation = PerturbationGaussian{0.1, 8.0, 1.0};
    return p;
}

Symbol constant_one() {
    Symbol s;
    s.order = 0.0;
    s.eval = [](double, double) { return Complex(1.0, 0.0); };
    return s;
}

}  // namespace

TEST_CASE("speed profile JSON round trip") {
    auto p = cosine_profile();
    auto q = SpeedProfile::from_json(p.to_json());
    for (double x : {0.0, 0.3, 1.7, 9.9})
        CHECK(q.evaluate(x, 16.0) == Catch::Approx(p.evaluate(x, 16.0)));

    SpeedProfile tab;
    tab.c0 = 1.0;
    tab.c1 = 0.5;
    tab.c2 = 1.6;
    std::vector<double> xs, cs;
    for (int i = 0; i < 64; ++i) {
        xs.push_back(i * 0.25);
        cs.push_back(1.0 + 0.2 * std::sin(kTwoPi * i / 64.0));
    }
    tab.perturbation = PerturbationTabulated::make(xs, cs);
    auto tab2 = SpeedProfile::from_json(tab.to_json());
    for (double x : {0.1, 4.0, 15.9})
        CHECK(tab2.evaluate(x, 16.0) == Catch::Approx(tab.evaluate(x, 16.0)));
}

TEST_CASE("tabulated CSV loader and spline accuracy") {
    const std::string path = "profile_tmp.csv";
    {
        std::ofstream out(path);
        out << "# x, c\n";
        for (int i = 0; i < 128; ++i) {
            const double x = i / 16.0;  // period 8
            out << x << "," << 1.0 + 0.1 * std::cos(kTwoPi * x / 8.0) << "\n";
        }
    }
    auto prof = load_tabulated_profile(path, 1.0, 0.8, 1.2);
    // Spline error for a smooth function at h = 1/16 should be ~h^4.
    for (double x : {0.03, 1.234, 5.5, 7.99}) {
        const double expect = 1.0 + 0.1 * std::cos(kTwoPi * x / 8.0);
        CHECK(std::abs(prof.evaluate(x, 8.0) - expect) < 1e-5);
    }
    std::remove(path.c_str());
}

TEST_CASE("pair admissibility constraint") {
    CHECK(SpeedProfile::constant(1.0, 0.85, 1.15).pair_admissible());
    CHECK(SpeedProfile::constant(1.5, 1.0, 2.0).pair_admissible());
    CHECK_FALSE(SpeedProfile::constant(1.0, 0.5, 2.5).pair_admissible());  // c2 > 2
    CHECK_FALSE(SpeedProfile::constant(0.5, 0.4, 1.0).pair_admissible());  // gap > 1
    CHECK_FALSE(SpeedProfile::constant(1.0, 1.2, 1.1).pair_admissible());
}

TEST_CASE("symbol d: values, bounds, rejection") {
    auto prof = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto d = make_symbol_d(prof, 16.0);
    CHECK(d(0.3, 1.0).real() == Catch::Approx(0.5));
    CHECK(std::abs(d(1.0, 0.0)) == 0.0);
    double prev = 0.0;
    for (double xi : {1.0, 4.0, 32.0, 1024.0, 65536.0}) {
        const double v = d(0.0, xi).real();
        CHECK(v > prev);
        CHECK(v < 1.0);
        prev = v;
    }
    CHECK(prev == Catch::Approx(1.0).epsilon(1e-4));

    auto bad = SpeedProfile::constant(1.0, 1.0, 1.1);  // c == c1, not strict
    CHECK_THROWS_AS(make_symbol_d(bad, 16.0), std::invalid_argument);
}

TEST_CASE("symbols p and p_inv: closed-form spot values and inverse identity") {
    auto one = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto p = make_symbol_p(one, 16.0);
    auto pinv = make_symbol_p_inv(one, 16.0);
    CHECK(p(0.1, 3.0).real() == Catch::Approx(4.0));
    CHECK(pinv(0.1, 3.0).real() == Catch::Approx(0.25));
    CHECK(p(2.0, 0.0).real() == Catch::Approx(1.0));
    CHECK(pinv(2.0, 0.0).real() == Catch::Approx(1.0));

    auto half = SpeedProfile::constant(0.5, 0.45, 0.55);
    CHECK(make_symbol_p(half, 16.0)(0.0, 2.0).real() == Catch::Approx(4.0));

    // p * p_inv = 1 and p >= 1 on random samples, variable speed.
    auto prof = cosine_profile();
    auto pv = make_symbol_p(prof, 16.0);
    auto pvi = make_symbol_p_inv(prof, 16.0);
    auto dv = make_symbol_d(prof, 16.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.0, 16.0), uxi(-300.0, 300.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = ux(rng), xi = uxi(rng);
        CHECK(std::abs(pv(x, xi) * pvi(x, xi) - 1.0) < 1e-12);
        CHECK(pv(x, xi).real() >= 1.0);
        const double dval = dv(x, xi).real();
        CHECK(dval >= 0.0);
        CHECK(dval <= 1.0 / prof.c1);
    }
}

TEST_CASE("semiclassical family d_t") {
    auto prof = cosine_profile();
    auto d0 = make_symbol_d_t(prof, 16.0, 0.0);
    for (double xi : {0.0, 1.5, -7.0})
        CHECK(d0(0.2, xi).real() == Catch::Approx(std::abs(xi)));

    auto one = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto d1 = make_symbol_d_t(one, 16.0, 1.0);
    auto d = make_symbol_d(one, 16.0);
    for (double xi : {0.5, 2.0, -9.0})
        CHECK(d1(0.0, xi).real() == Catch::Approx(d(0.0, xi).real()));

    // d_t(x, xi) = t^{-1} d(x, t xi) exactly.
    const double t = 0.37;
    auto dt = make_symbol_d_t(prof, 16.0, t);
    auto dfull = make_symbol_d(prof, 16.0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(0.0, 16.0), uxi(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = ux(rng), xi = uxi(rng);
        CHECK(std::abs(dt(x, xi) - dfull(x, t * xi) / t) <
              1e-12 * (1 + std::abs(xi)));
    }
    CHECK_THROWS_AS(make_symbol_d_t(prof, 16.0, -0.1), std::invalid_argument);
}

TEST_CASE("interface symbol p_M") {
    const auto g = GridSpec::make(64, 8.0);
    auto flat = GridFunction::zero(g);
    auto pm = make_symbol_p_M({0.0, 1.0}, flat);
    for (double xi : {0.5, -3.0})
        CHECK(pm(1.0, xi).real() == Catch::Approx(-std::abs(xi)));
    CHECK(std::abs(pm(2.0, 0.0)) == 0.0);

    auto ones = GridFunction::sample(g, [](double) { return 1.0; });
    auto pm2 = make_symbol_p_M({0.0, 2.0}, ones);
    CHECK(pm2(0.7, 3.0).real() == Catch::Approx(-3.0));

    CHECK_THROWS_AS(make_symbol_p_M({1.0, 1.0}, flat), std::invalid_argument);
}

TEST_CASE("weight symbol") {
    auto w0 = make_weight(0.0);
    CHECK(w0(0.0, 123.0) == Complex(1.0, 0.0));
    auto w1 = make_weight(1.0);
    CHECK(w1(0.0, 0.0) == Complex(1.0, 0.0));
    auto wm1 = make_weight(-1.0);
    CHECK(std::abs(wm1(0.0, 1.0 / kTwoPi)) ==
          Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("dyadic partition of unity") {
    const int j_max = 5;
    auto parts = make_dyadic_partition(j_max);
    REQUIRE(parts.size() == static_cast<std::size_t>(j_max) + 2);

    auto total = [&](double xi) {
        Complex acc = 0.0;
        for (const auto& ph : parts) acc += ph(0.0, xi);
        return acc.real();
    };
    CHECK(total(0.0) == Catch::Approx(1.0).margin(1e-12));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-std::pow(2.0, j_max),
                                             std::pow(2.0, j_max));
    for (int i = 0; i < 200; ++i)
        REQUIRE(std::abs(total(u(rng)) - 1.0) < 1e-10);

    // supports: phi_2 = phi(xi/4) vanishes outside 2 <= |xi| <= 8
    const auto& phi2 = parts[2 + 1];  // parts[j + 1] holds phi_j
    CHECK(std::abs(phi2(0.0, 1.0)) == 0.0);
    CHECK(std::abs(phi2(0.0, 16.0)) == 0.0);
    CHECK(std::abs(phi2(0.0, 4.0)) > 0.0);
    CHECK(dyadic_support_distance(2) == Catch::Approx(2.0));
    CHECK(phi2.xi_support->second == Catch::Approx(8.0));
}

TEST_CASE("bump function") {
    auto chi = make_bump(4.0, 1.0, 16.0);
    CHECK(chi(4.0, 0.0).real() == Catch::Approx(1.0));
    CHECK(std::abs(chi(5.0, 0.0)) == 0.0);
    CHECK(std::abs(chi(3.0, 0.0)) == 0.0);
    CHECK(chi(4.3, 0.0).real() == Catch::Approx(1.0));  // inside the flat core
    for (double x = 0.0; x < 16.0; x += 0.05) {
        const double v = chi(x, 0.0).real();
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    CHECK_THROWS_AS(make_bump(4.0, 9.0, 16.0), std::invalid_argument);
}

TEST_CASE("finite-difference weights match classical tables") {
    auto st1 = detail::central_stencil(1, 4);
    REQUIRE(st1.radius == 2);
    const double t1[] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    for (int i = 0; i < 5; ++i)
        CHECK(st1.weights[i] == Catch::Approx(t1[i]).margin(1e-13));

    auto st2 = detail::central_stencil(2, 4);
    const double t2[] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    for (int i = 0; i < 5; ++i)
        CHECK(st2.weights[i] == Catch::Approx(t2[i]).margin(1e-13));

    // 4th-order stencil differentiates x^3 exactly.
    auto st3 = detail::central_stencil(3, 4);
    REQUIRE(st3.radius == 3);
    double acc = 0.0;
    for (int o = -3; o <= 3; ++o)
        acc += st3.weights[o + 3] * std::pow(static_cast<double>(o), 3);
    CHECK(acc == Catch::Approx(6.0).margin(1e-10));
}

TEST_CASE("seminorm M: constant symbol and saturation of d") {
    SeminormBox box{16.0, 32, 64.0, 257, 4};
    auto est = seminorm_M(constant_one(), 2, 1, 0.0, box);
    CHECK(est.value == Catch::Approx(1.0).margin(1e-9));
    CHECK(est.converged);

    auto prof = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto d = make_symbol_d(prof, 16.0);
    SeminormBox small{16.0, 16, 32.0, 129, 4};
    SeminormBox large{16.0, 16, 2048.0, 513, 4};
    const double v_small = seminorm_M(d, 0, 0, 0.0, small).value;
    const double v_large = seminorm_M(d, 0, 0, 0.0, large).value;
    CHECK(v_small < v_large);
    CHECK(v_large == Catch::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("seminorm M: weighted growth of p with c = 1/2") {
    auto half = SpeedProfile::constant(0.5, 0.45, 0.55);
    auto p = make_symbol_p(half, 16.0);
    SeminormBox box{16.0, 16, 1e4, 4097, 4};
    auto est = seminorm_M(p, 0, 0, 2.0, box);
    CHECK(est.value == Catch::Approx(1.0).epsilon(1e-6));
    CHECK(est.converged);
}

TEST_CASE("seminorm M refinement is monotone within tolerance") {
    auto prof = cosine_profile();
    for (const Symbol& a : {make_symbol_d(prof, 16.0), make_symbol_p(prof, 16.0)}) {
        SeminormBox box{16.0, 32, 128.0, 257, 4};
        auto est = seminorm_M(a, 1, 1, a.order, box);
        REQUIRE(est.value >= est.coarse_value * 0.95);
        REQUIRE(est.converged);
    }
}

TEST_CASE("seminorm N: pure x-mode and Pi parts") {
    const double L = 16.0;
    Symbol mode;
    mode.order = 0.0;
    mode.eval = [L](double x, double) {
        return std::exp(Complex(0.0, kTwoPi * x / L));
    };
    SeminormBox box{L, 64, 8.0, 65, 4};
    auto est = seminorm_N(mode, 0.0, 0, 0.0, box);
    CHECK(est.value == Catch::Approx(std::sqrt(L)).epsilon(1e-10));
    CHECK_FALSE(est.diverged_mean);

    // Constant speed: the x-varying part vanishes identically.
    auto flat = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto d_flat = make_symbol_d(flat, L);
    auto [pi0, sigma0] = decompose_pi_sigma(d_flat, flat, L);
    auto est0 = seminorm_N(pi0, 2.0, 1, 0.0, box);
    CHECK(est0.value < 1e-13);

    // Gaussian perturbation: finite, grid-stable, and not mean-flagged.
    auto prof = gaussian_profile();
    auto d = make_symbol_d(prof, L);
    auto [pi, sigma] = decompose_pi_sigma(d, prof, L);
    SeminormBox wide{L, 512, 32.0, 129, 4};
    auto estg = seminorm_N(pi, 2.0, 1, 0.0, wide);
    CHECK(estg.value > 0.0);
    CHECK(estg.converged);  // n = 512 vs 1024 within 5%
    CHECK_FALSE(estg.diverged_mean);

    // Passing the full symbol (nonzero persistent mean) must be flagged.
    auto estd = seminorm_N(d, 2.0, 0, 0.0, wide);
    CHECK(estd.diverged_mean);
}

TEST_CASE("pi-sigma decomposition") {
    const double L = 16.0;
    auto prof = gaussian_profile();
    for (auto maker : {make_symbol_d, make_symbol_p, make_symbol_p_inv}) {
        auto a = maker(prof, L);
        auto [pi, sigma0] = decompose_pi_sigma(a, prof, L);
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> ux(0.0, L), uxi(-200.0, 200.0);
        for (int i = 0; i < 1000; ++i) {
            const double x = ux(rng), xi = uxi(rng);
            const Complex recon = pi(x, xi) + sigma0(x, xi);
            REQUIRE(std::abs(recon - a(x, xi)) <=
                    1e-14 * std::max(1.0, std::abs(a(x, xi))));
        }
    }
    // Sigma0 of d is the frozen-speed multiplier.
    auto d = make_symbol_d(prof, L);
    auto [pi, sigma0] = decompose_pi_sigma(d, prof, L);
    for (double xi : {0.0, 1.0, -5.5, 100.0})
        CHECK(sigma0(3.3, xi).real() ==
              Catch::Approx(std::abs(xi) / (1.0 + prof.c0 * std::abs(xi)))
                  .margin(1e-14));

    auto w = make_weight(1.0);
    CHECK_THROWS_AS(decompose_pi_sigma(w, prof, L), std::invalid_argument);
}

TEST_CASE("seminorm scaling along the semiclassical family") {
    const double L = 16.0;
    auto prof = cosine_profile();
    auto p = make_symbol_p(prof, L);
    auto d = make_symbol_d(prof, L);
    const double m1 = 1.0 / prof.c1;

    SeminormBox box{L, 32, 64.0, 257, 4};
    for (const auto& [a, m] : {std::make_pair(p, m1), std::make_pair(d, 0.0)}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double t : {1.0, 0.5, 0.25, 0.125}) {
            const double v = seminorm_M(rescale_symbol(a, t), 2, 1, m, box).value;
            REQUIRE(v <= prev * 1.02);
            prev = v;
        }
    }

    // Same monotonicity for the Sobolev-in-x seminorms of the Pi parts.
    auto prof_g = gaussian_profile();
    auto dg = make_symbol_d(prof_g, L);
    auto [pi, sigma] = decompose_pi_sigma(dg, prof_g, L);
    SeminormBox nbox{L, 128, 32.0, 65, 4};
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 0.5, 0.25, 0.125}) {
        const double v = seminorm_N(rescale_symbol(pi, t), 2.0, 1, 0.0, nbox).value;
        REQUIRE(v <= prev * 1.02);
        prev = v;
    }
}

TEST_CASE("admissibility report") {
    const auto g = GridSpec::make(256, 16.0);

    auto flat = SpeedProfile::constant(1.0, 0.9, 1.1);
    auto rep = check_admissible(flat, g);
    CHECK(rep.pair_ok);
    CHECK(rep.c1_c2_check);
    CHECK(rep.c2_supported);
    CHECK(rep.verdict != "none");
    for (const auto& d : rep.derivative_seminorms) CHECK(d.sup < 1e-8);

    // Requirement arithmetic for the pair (1, 2).
    CHECK(required_wn_order(1.0) == 3);
    CHECK(required_sobolev_index(1.0) > 2.5);
    CHECK(required_sobolev_index(1.0) <= 2.6);

    // Adversarial profile dipping below c1.
    SpeedProfile bad = flat;
    bad.perturbation = PerturbationCosine{0.2, 1};
    auto rep_bad = check_admissible(bad, g);
    CHECK_FALSE(rep_bad.c1_c2_check);
    CHECK_THROWS_AS(require_admissible(bad, g), std::invalid_argument);

    // Smooth variable profile passes both routes.
    auto cosine = cosine_profile();
    auto rep_cos = check_admissible(cosine, g);
    CHECK(rep_cos.c1_c2_check);
    CHECK(rep_cos.n_required == 3);
    CHECK(rep_cos.verdict == "C2+C2'");
}

TEST_CASE("rough and plateau profile constructors") {
    auto rough = make_rough_profile(1.0, 0.05, 5.5, 128, 7u, 0.9, 1.1);
    CHECK(rough.pinched_on(0.0625));
    const auto g = GridSpec::make(512, 0.0625);
    CHECK(check_admissible(rough, g).c1_c2_check);

    SpeedProfile plat;
    plat.c0 = 1.0;
    plat.c1 = 0.9;
    plat.c2 = 1.35;
    plat.perturbation = PerturbationPlateau{0.3, 2.0, 0.6, 1.2};
    // Exactly the baseline on the plateau, strictly above it far away.
    CHECK(plat.evaluate(2.0, 4.0) == 1.0);
    CHECK(plat.evaluate(2.5, 4.0) == 1.0);
    CHECK(plat.evaluate(0.0, 4.0) == Catch::Approx(1.3));
}
