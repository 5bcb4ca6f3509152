#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "modvar/fourier.hpp"
#include "modvar/grid.hpp"
#include "modvar/rng.hpp"

using modvar::cd;
using modvar::Grid;
using modvar::kTwoPi;

TEST_CASE("grid geometry") {
    const Grid g(8, 4.0);
    CHECK(g.dx() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.dp() == doctest::Approx(kTwoPi / 4.0).epsilon(1e-15));
    CHECK(g.x(0) == doctest::Approx(-2.0));
    CHECK(g.x(4) == doctest::Approx(0.0));
    CHECK(g.x(7) == doctest::Approx(1.5));
    CHECK(g.momentum_index(0) == 0);
    CHECK(g.momentum_index(3) == 3);
    CHECK(g.momentum_index(4) == -4);
    CHECK(g.momentum_index(7) == -1);
    // dx dp n = 2 pi makes the transform pair exactly unitary.
    CHECK(g.dx() * g.dp() * g.n_points() == doctest::Approx(kTwoPi).epsilon(1e-15));
}

TEST_CASE("grid rejects odd sizes and bad lengths") {
    CHECK_THROWS_AS(Grid(7, 1.0), modvar::GridError);
    CHECK_THROWS_AS(Grid(0, 1.0), modvar::GridError);
    CHECK_THROWS_AS(Grid(8, 0.0), modvar::GridError);
    CHECK_THROWS_AS(Grid(8, -1.0), modvar::GridError);
}

TEST_CASE("site_shift accepts lattice multiples only") {
    const Grid g(16, 8.0);  // dx = 0.5
    CHECK(g.site_shift(1.5, "d") == 3);
    CHECK(g.site_shift(-2.0, "d") == -4);
    CHECK(g.site_shift(0.0, "d") == 0);
    CHECK_THROWS_AS(g.site_shift(0.3, "d"), modvar::GridError);
}

TEST_CASE("round trip is the identity to machine precision") {
    const Grid g(256, 17.0);
    modvar::Philox4x32 rng(11, 0);
    std::vector<cd> amps(256);
    for (auto& a : amps) a = cd(rng.normal(), rng.normal());
    const auto back = modvar::to_position(g, modvar::to_momentum(g, amps));
    double worst = 0.0;
    for (size_t i = 0; i < amps.size(); ++i)
        worst = std::max(worst, std::abs(back[i] - amps[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("transform conserves the lattice norm exactly") {
    const Grid g(512, 40.0);
    modvar::Philox4x32 rng(12, 0);
    std::vector<cd> amps(512);
    for (auto& a : amps) a = cd(rng.normal(), rng.normal());
    double nx = 0.0;
    for (const auto& a : amps) nx += std::norm(a) * g.dx();
    const auto tilde = modvar::to_momentum(g, amps);
    double np = 0.0;
    for (const auto& a : tilde) np += std::norm(a) * g.dp();
    CHECK(std::abs(nx - np) < 1e-12 * nx);
}

TEST_CASE("plane wave lands in a single momentum bin") {
    const Grid g(128, 16.0);
    const int bin = 5;  // p = 5 dp
    const double p0 = bin * g.dp();
    std::vector<cd> amps(128);
    for (int i = 0; i < 128; ++i)
        amps[static_cast<size_t>(i)] =
            std::polar(1.0 / std::sqrt(g.length()), p0 * g.x(i));
    const auto tilde = modvar::to_momentum(g, amps);
    for (int j = 0; j < 128; ++j) {
        const double mag = std::abs(tilde[static_cast<size_t>(j)]);
        if (j == bin)
            CHECK(mag * mag * g.dp() == doctest::Approx(1.0).epsilon(1e-12));
        else
            CHECK(mag < 1e-12);
    }
}

TEST_CASE("negative-frequency plane wave uses the aliased bin") {
    const Grid g(64, 8.0);
    const double p0 = -3 * g.dp();
    std::vector<cd> amps(64);
    for (int i = 0; i < 64; ++i)
        amps[static_cast<size_t>(i)] =
            std::polar(1.0 / std::sqrt(g.length()), p0 * g.x(i));
    const auto tilde = modvar::to_momentum(g, amps);
    for (int j = 0; j < 64; ++j) {
        const double mag = std::abs(tilde[static_cast<size_t>(j)]);
        if (g.momentum_index(j) == -3)
            CHECK(mag > 0.1);
        else
            CHECK(mag < 1e-12);
    }
}

TEST_CASE("gaussian transforms into the conjugate gaussian") {
    // exp(-x^2/(4 s^2)) <-> exp(-s^2 p^2) up to normalization, real and even.
    const Grid g(1024, 60.0);
    const double s = 1.3;
    std::vector<cd> amps(1024);
    for (int i = 0; i < 1024; ++i) {
        const double x = g.x(i);
        amps[static_cast<size_t>(i)] =
            std::pow(kTwoPi * s * s, -0.25) * std::exp(-x * x / (4 * s * s));
    }
    const auto tilde = modvar::to_momentum(g, amps);
    const double norm_want = std::pow(2.0 * s * s / modvar::kPi, 0.25);
    double worst = 0.0;
    for (int j = 0; j < 1024; ++j) {
        const double p = g.p(j);
        if (std::abs(p) > 8.0) continue;  // compare where the state lives
        const cd want = norm_want * std::exp(-s * s * p * p);
        worst = std::max(worst, std::abs(tilde[static_cast<size_t>(j)] - want));
    }
    CHECK(worst < 1e-10);
    // Imaginary parts vanish for a real even function.
    double imag_max = 0.0;
    for (const auto& t : tilde) imag_max = std::max(imag_max, std::abs(t.imag()));
    CHECK(imag_max < 1e-12);
}
