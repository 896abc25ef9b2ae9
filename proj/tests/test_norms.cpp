#include <random>

#include <catch_amalgamated.hpp>

#include "semiclass/norms.hpp"

using namespace semiclass;

namespace {

GridFunction random_function(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    GridFunction f{g, Eigen::VectorXcd(g.n)};
    for (int k = 0; k < g.n; ++k) f.values[k] = Complex(dist(rng), dist(rng));
    return f;
}

}  // namespace

TEST_CASE("s = 0 recovers the plain L2 norm") {
    const auto g = GridSpec::make(128, 4.0);
    auto f = random_function(g, 1);
    CHECK(hst_norm(f, 0.0, 0.3) == Catch::Approx(l2_norm(f)).epsilon(1e-13));
}

TEST_CASE("t = 1 gives the classical discrete Sobolev norm") {
    const auto g = GridSpec::make(128, 4.0);
    auto f = random_function(g, 2);
    const double s = 1.7;
    auto F = forward_transform(f);
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double xi = g.freq_node(i);
        acc += std::pow(1.0 + 4.0 * kPi * kPi * xi * xi, s) * std::norm(F.coeffs[i]);
    }
    CHECK(hst_norm(f, s, 1.0) ==
          Catch::Approx(std::sqrt(g.dxi() * acc)).epsilon(1e-13));
}

TEST_CASE("pure mode norm equals the single-term weight") {
    // Unit period so the mode has unit coefficient and unit L2 norm.
    const auto g = GridSpec::make(64, 1.0);
    const int m = 5;
    auto f = GridFunction::sample(g, [&](double x) {
        return std::exp(Complex(0.0, kTwoPi * m * x / g.period));
    });
    const double t = 0.25, s = -1.4, xi = m / g.period;
    const double expect =
        std::pow(1.0 + 4.0 * kPi * kPi * t * t * xi * xi, 0.5 * s);
    CHECK(hst_norm(f, s, t) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("weight and un-weight round trip") {
    const auto g = GridSpec::make(256, 8.0);
    auto f = random_function(g, 3);
    for (double s : {0.0, 1.0, -2.3, 0.5}) {
        auto w = apply_weight(apply_weight(f, s, 0.1), -s, 0.1);
        REQUIRE((w.values - f.values).norm() <= 1e-10 * f.values.norm());
    }
    auto id = apply_weight(f, 0.0, 0.7);
    CHECK((id.values - f.values).norm() <= 1e-12 * f.values.norm());
}

TEST_CASE("hst norm factors through apply_weight") {
    const auto g = GridSpec::make(128, 2.0);
    auto f = random_function(g, 4);
    const double s = 1.3, t = 0.2;
    CHECK(hst_norm(f, s, t) ==
          Catch::Approx(l2_norm(apply_weight(f, s, t))).epsilon(1e-12));
}

TEST_CASE("norm is nondecreasing in s") {
    const auto g = GridSpec::make(128, 4.0);
    auto f = random_function(g, 5);
    const double t = 0.4;
    double prev = hst_norm(f, -2.0, t);
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
        const double cur = hst_norm(f, s, t);
        REQUIRE(cur >= prev * (1.0 - 1e-13));
        prev = cur;
    }
}

TEST_CASE("duality bound |<f,g>| <= ||f||_s ||g||_{-s}") {
    const auto g = GridSpec::make(128, 4.0);
    for (unsigned trial = 0; trial < 50; ++trial) {
        auto f = random_function(g, 100 + trial);
        auto h = random_function(g, 900 + trial);
        const double s = 0.9, t = 0.3;
        const double lhs = std::abs(inner_product(f, h));
        const double rhs = hst_norm(f, s, t) * hst_norm(h, -s, t);
        REQUIRE(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("norm equivalence for comparable t") {
    const auto g = GridSpec::make(256, 4.0);
    auto f = random_function(g, 6);
    for (double s : {1.5, -1.5}) {
        const double t = 0.6;
        for (double tp : {0.3, 0.4, 0.5, 0.6}) {
            const double ratio = hst_norm(f, s, tp) / hst_norm(f, s, t);
            const double bound = std::pow(2.0, std::abs(s));
            REQUIRE(ratio <= bound * (1.0 + 1e-12));
            REQUIRE(ratio >= 1.0 / bound * (1.0 - 1e-12));
        }
    }
}
