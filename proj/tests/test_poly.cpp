#include <doctest.h>

#include <cmath>
#include <random>

#include "poly.hpp"

using namespace mcn;

TEST_CASE("polynomial product expands as expected") {
    // (z+1)(z-1) = z^2 - 1
    CHECK(poly_mul(Polynomial{1.0, 1.0}, Polynomial{-1.0, 1.0})
              .near_equal(Polynomial{-1.0, 0.0, 1.0}, 1e-15));
    // identity
    const Polynomial p{0.5, -2.0, 3.0};
    CHECK(poly_mul(p, Polynomial::one()).near_equal(p, 1e-15));
    // (z-1)(z^2 + c1 z + c0) = z^3 + (c1-1) z^2 + (c0-c1) z - c0
    const double c1 = 0.7, c0 = -1.3;
    CHECK(poly_mul(Polynomial{-1.0, 1.0}, Polynomial{c0, c1, 1.0})
              .near_equal(Polynomial{-c0, c0 - c1, c1 - 1.0, 1.0}, 1e-15));
}

TEST_CASE("polynomial product is commutative and associative") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto rand_poly = [&] {
            std::vector<double> c(1 + rng() % 5);
            for (auto& v : c) v = u(rng);
            return Polynomial(c);
        };
        const Polynomial a = rand_poly(), b = rand_poly(), c = rand_poly();
        CHECK((a * b).near_equal(b * a, 1e-12));
        CHECK(((a * b) * c).near_equal(a * (b * c), 1e-12));
    }
}

TEST_CASE("normalization strips trailing zeros and keeps the zero polynomial") {
    CHECK(Polynomial({1.0, 2.0, 0.0, 0.0}).degree() == 1);
    CHECK(Polynomial({0.0, 0.0}).is_zero());
    CHECK(Polynomial().is_zero());
    CHECK(Polynomial{5.0}.degree() == 0);
}

TEST_CASE("zoh of an integrator is T/(z-1)") {
    const RationalTF p(Polynomial{1.0}, Polynomial{0.0, 1.0});
    const double T = 0.05;
    const auto d = zoh_discretize(p, T);
    CHECK(d.num.near_equal(Polynomial{T}, 1e-12));
    CHECK(d.den.near_equal(Polynomial{-1.0, 1.0}, 1e-12));
    CHECK(d.sample_time == T);
}

TEST_CASE("zoh of a first-order lag matches the analytic formula") {
    // a/(s+a) -> (1-e^{-aT}) / (z - e^{-aT})
    for (double a : {0.5, 2.0, 10.0}) {
        for (double T : {0.01, 0.1, 1.0}) {
            const auto d = zoh_discretize(RationalTF(Polynomial{a}, Polynomial{a, 1.0}), T);
            const double pole = std::exp(-a * T);
            CHECK(d.den.near_equal(Polynomial{-pole, 1.0}, 1e-12));
            CHECK(d.num.near_equal(Polynomial{1.0 - pole}, 1e-12));
        }
    }
}

TEST_CASE("zoh of a static gain stays a static gain") {
    const auto d = zoh_discretize(RationalTF(Polynomial{4.5}, Polynomial{1.5}), 0.1);
    CHECK(d.num.near_equal(Polynomial{3.0}, 1e-12));
    CHECK(d.den.near_equal(Polynomial::one(), 1e-12));
}

TEST_CASE("zoh maps every continuous pole to exp(sT)") {
    // third-order plant with real and complex poles: 1 / ((s+1)(s^2+2s+5))
    const Polynomial den = Polynomial{1.0, 1.0} * Polynomial{5.0, 2.0, 1.0};
    const RationalTF p(Polynomial{1.0}, den);
    const double T = 0.07;
    const auto d = zoh_discretize(p, T);
    for (const auto& s : den.roots()) {
        const auto target = std::exp(s * T);
        double best = 1e9;
        for (const auto& z : d.den.roots()) best = std::min(best, std::abs(z - target));
        CHECK(best < 1e-9);
    }
}

TEST_CASE("zoh rejects degenerate input") {
    CHECK_THROWS_AS(zoh_discretize(RationalTF(Polynomial{1.0}, Polynomial{2.0, 1.0}), 0.0),
                    StructureError);
    CHECK_THROWS_AS(
        zoh_discretize(RationalTF(Polynomial{1.0, 0.0, 1.0}, Polynomial{2.0, 1.0}), 0.1),
        StructureError);
}

TEST_CASE("split_stable puts z+3 entirely in the unstable part") {
    const auto split = split_stable(RationalTF(Polynomial{1.0}, Polynomial{3.0, 1.0}, 1.0));
    CHECK(split.stable_part.near_equal(Polynomial::one(), 1e-12));
    CHECK(split.unstable_part_den.near_equal(Polynomial{3.0, 1.0}, 1e-12));
    CHECK(split.r == 1);
}

TEST_CASE("split_stable separates mixed denominators") {
    const Polynomial den = Polynomial{-0.5, 1.0} * Polynomial{-2.0, 1.0};  // (z-0.5)(z-2)
    const auto split = split_stable(RationalTF(Polynomial{1.0}, den, 1.0));
    CHECK(split.stable_part.near_equal(Polynomial{-0.5, 1.0}, 1e-9));
    CHECK(split.unstable_part_den.near_equal(Polynomial{-2.0, 1.0}, 1e-9));
    CHECK(split.r == 1);
}

TEST_CASE("split_stable classifies the unit-circle boundary as unstable") {
    const Polynomial den = Polynomial{-1.0, 1.0} * Polynomial{-0.3, 1.0};  // (z-1)(z-0.3)
    const auto split = split_stable(RationalTF(Polynomial{1.0}, den, 1.0));
    CHECK(split.unstable_part_den.near_equal(Polynomial{-1.0, 1.0}, 1e-9));
    CHECK(split.r == 1);
}

TEST_CASE("split_stable reconstructs the denominator on random plants") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.8, 1.8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::complex<double>> roots;
        const int nreal = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < nreal; ++i) roots.emplace_back(u(rng), 0.0);
        if (rng() % 2) {
            const double re = u(rng) * 0.7, im = 0.1 + std::abs(u(rng)) * 0.5;
            roots.emplace_back(re, im);
            roots.emplace_back(re, -im);
        }
        const Polynomial den = Polynomial::from_roots(roots);
        const auto split = split_stable(RationalTF(Polynomial{1.0}, den, 1.0));
        CHECK((split.stable_part * split.unstable_part_den).near_equal(den, 1e-9));
        for (const auto& z : split.stable_part.roots()) CHECK(std::abs(z) < 1.0);
        for (const auto& z : split.unstable_part_den.roots()) CHECK(std::abs(z) >= 1.0 - 1e-9);
    }
}

TEST_CASE("difference-equation simulation reproduces a known FIR response") {
    // y = (0.6 z + 0.4)/z^2 driven by a unit step: y = 0, 0.6, 1, 1, ...
    const RationalTF g(Polynomial{0.4, 0.6}, Polynomial::monomial(2), 1.0);
    const auto y = simulate(g, step_input(1.0, 6));
    CHECK(y[0] == doctest::Approx(0.0));
    CHECK(y[1] == doctest::Approx(0.6));
    for (size_t k = 2; k < y.size(); ++k) CHECK(y[k] == doctest::Approx(1.0));
}

TEST_CASE("simulation matches the analytic first-order step response") {
    const double a = 0.5;
    const RationalTF g(Polynomial{1.0 - a}, Polynomial{-a, 1.0}, 1.0);  // (1-a)/(z-a)
    const auto y = simulate(g, step_input(2.0, 20));
    for (size_t k = 0; k < y.size(); ++k) {
        const double expected = k == 0 ? 0.0 : 2.0 * (1.0 - std::pow(a, static_cast<double>(k)));
        CHECK(y[k] == doctest::Approx(expected).epsilon(1e-12));
    }
}
