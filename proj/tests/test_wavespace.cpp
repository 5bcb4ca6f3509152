#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "modvar/rng.hpp"
#include "modvar/wavespace.hpp"

using namespace modvar;

namespace {

WaveFunction random_state(const Grid& grid, std::uint64_t seed) {
    Philox4x32 rng(seed);
    std::vector<cd> amps(grid.n_points());
    for (auto& a : amps) a = cd(rng.normal(), rng.normal());
    WaveFunction psi(grid, std::move(amps));
    psi.normalize();
    return psi;
}

double max_amp_diff(const WaveFunction& a, const WaveFunction& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.amps().size(); ++i)
        m = std::max(m, std::abs(a.amps()[i] - b.amps()[i]));
    return m;
}

}  // namespace

TEST_CASE("lump profiles are normalized and confined to their windows") {
    const Grid grid(512, 32.0);

    LumpSpec gauss{LumpSpec::Kind::gaussian, 0.0, 0.7};
    const WaveFunction g = make_lump(grid, gauss);
    CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-13));

    LumpSpec bump{LumpSpec::Kind::compact, 2.0, 1.5};
    const WaveFunction b = make_lump(grid, bump);
    CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 0; i < grid.n_points(); ++i) {
        if (std::abs(grid.x(i) - bump.center) >= bump.sigma)
            CHECK(std::abs(b.amps()[i]) == 0.0);
    }

    // Window sticking out of the box, in either direction.
    CHECK_THROWS_AS(make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 10.0, 1.0}),
                    GridError);
    CHECK_THROWS_AS(make_lump(grid, LumpSpec{LumpSpec::Kind::compact, -15.5, 1.0}),
                    GridError);
    CHECK_THROWS_AS(make_lump(grid, LumpSpec{LumpSpec::Kind::compact, 0.0, 0.0}),
                    GridError);
    CHECK_THROWS_AS(make_lump(grid, LumpSpec{LumpSpec::Kind::compact, 0.0, -1.0}),
                    GridError);
}

TEST_CASE("two-lump states split mass evenly between disjoint windows") {
    const Grid grid(1024, 64.0);
    const LumpSpec lump{LumpSpec::Kind::compact, 0.0, 1.0};
    const double sep = 8.0;

    for (double alpha : {0.0, 0.9, 2.0, -1.3}) {
        const WaveFunction psi = make_two_lump(grid, lump, sep, alpha);
        CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-13));

        double right_window_mass = 0.0;
        const auto dens = psi.position_density();
        for (int i = 0; i < grid.n_points(); ++i)
            if (grid.x(i) > 0.0) right_window_mass += dens[i] * grid.dx();
        CHECK(right_window_mass == doctest::Approx(0.5).epsilon(1e-12));
    }

    CHECK_THROWS_AS(make_two_lump(grid, LumpSpec{LumpSpec::Kind::compact, 0.0, 3.0},
                                  4.0, 0.0),
                    OverlapError);
    // Gaussian windows are 12 sigma half-width.
    CHECK_THROWS_AS(make_two_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 0.0, 1.0},
                                  8.0, 0.0),
                    OverlapError);
    CHECK_THROWS_AS(make_two_lump(grid, lump, 1.3 / 3.0, 0.0), GridError);
    CHECK_THROWS_AS(make_two_lump(grid, lump, -8.0, 0.0), GridError);
}

TEST_CASE("lattice translation carries the right lump onto the left") {
    const Grid grid(1024, 64.0);
    const double sep = 8.0;
    const WaveFunction left =
        make_lump(grid, LumpSpec{LumpSpec::Kind::compact, sep / 2.0, 1.0});
    const WaveFunction right =
        make_lump(grid, LumpSpec{LumpSpec::Kind::compact, -sep / 2.0, 1.0});

    // psi(x) -> psi(x + a): a = -sep moves the lump at -sep/2 up to +sep/2.
    CHECK(max_amp_diff(apply_translation(right, -sep), left) < 1e-13);

    // Index permutations invert exactly.
    const WaveFunction psi = random_state(grid, 11);
    const WaveFunction back = apply_translation(apply_translation(psi, 3.0), -3.0);
    CHECK(max_amp_diff(back, psi) == 0.0);

    CHECK_THROWS_AS(apply_translation(psi, 0.03), GridError);
}

TEST_CASE("translation equals the momentum-space phase convention") {
    const Grid grid(256, 16.0);
    const WaveFunction psi = random_state(grid, 23);
    const double a = 1.5;
    const int s = grid.site_shift(a, "test displacement");

    std::vector<cd> mom = psi.momentum_amps();
    for (int j = 0; j < grid.n_points(); ++j) {
        const double phase =
            kTwoPi * grid.momentum_index(j) * s / static_cast<double>(grid.n_points());
        mom[j] *= std::polar(1.0, phase);
    }
    const WaveFunction via_phases(grid, to_position(grid, mom));

    CHECK(max_amp_diff(apply_translation(psi, a), via_phases) < 1e-12);
}

TEST_CASE("translation expectation matches a direct overlap oracle") {
    const Grid grid(1024, 64.0);

    // Oracle route: <psi| e^{ipD} |psi> = <psi | psi(. + D)> summed in position
    // space. The library computes the same number from the momentum density.
    const WaveFunction noise = random_state(grid, 37);
    const cd oracle = inner(noise, apply_translation(noise, 4.0));
    const cd lib = translation_expectation(noise, 4.0);
    CHECK(std::abs(lib - oracle) < 1e-12);

    const LumpSpec lump{LumpSpec::Kind::compact, 0.0, 1.0};
    const double sep = 8.0;
    for (double alpha : {0.0, 0.37, kPi / 2.0, kPi, 2.2, 5.9}) {
        const WaveFunction psi = make_two_lump(grid, lump, sep, alpha);
        const cd expect = 0.5 * std::polar(1.0, -alpha);
        CHECK(std::abs(translation_expectation(psi, sep) - expect) < 1e-13);
        CHECK(std::abs(inner(psi, apply_translation(psi, sep)) - expect) < 1e-13);
    }

    // Twice the separation jumps over both windows: no overlap at all.
    const WaveFunction psi0 = make_two_lump(grid, lump, sep, 0.7);
    CHECK(std::abs(translation_expectation(psi0, 2.0 * sep)) < 1e-13);
}

TEST_CASE("boosts shift the mean momentum and rotate the translation phase") {
    const Grid grid(1024, 64.0);
    const LumpSpec lump{LumpSpec::Kind::gaussian, 0.0, 0.5};
    const WaveFunction psi = make_lump(grid, lump);

    const double delta = 1.7;
    const WaveFunction kicked = boost(psi, delta);
    CHECK(kicked.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(expect_xm_pn(kicked, 0, 1).real() == doctest::Approx(delta).epsilon(1e-12));

    const double d = 4.0;
    const cd before = translation_expectation(psi, d);
    const cd after = translation_expectation(kicked, d);
    CHECK(std::abs(after - std::polar(1.0, delta * d) * before) < 1e-13);
    CHECK(std::abs(std::abs(after) - std::abs(before)) < 1e-13);
}

TEST_CASE("moment orders outside the supported window are rejected") {
    const Grid grid(128, 16.0);
    const WaveFunction psi = make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 0.0, 0.6});

    CHECK_THROWS_AS(expect_xm_pn(psi, 9, 0), OrderOverflowError);
    CHECK_THROWS_AS(expect_xm_pn(psi, 0, 9), OrderOverflowError);
    CHECK_THROWS_AS(expect_xm_pn(psi, -1, 0), OrderOverflowError);
    CHECK_THROWS_AS(expect_xm_pn(psi, 0, -1), OrderOverflowError);
    CHECK(std::isfinite(expect_xm_pn(psi, 8, 8).real()));
}

TEST_CASE("gaussian lump moments match the closed forms") {
    const Grid grid(512, 32.0);
    const double sigma = 0.7;
    const WaveFunction psi = make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 0.0, sigma});

    CHECK(std::abs(expect_xm_pn(psi, 0, 0) - 1.0) < 1e-13);
    CHECK(std::abs(expect_xm_pn(psi, 1, 0)) < 1e-13);
    CHECK(expect_xm_pn(psi, 2, 0).real() ==
          doctest::Approx(sigma * sigma).epsilon(1e-12));
    CHECK(expect_xm_pn(psi, 4, 0).real() ==
          doctest::Approx(3.0 * std::pow(sigma, 4)).epsilon(1e-11));
    CHECK(expect_xm_pn(psi, 0, 2).real() ==
          doctest::Approx(1.0 / (4.0 * sigma * sigma)).epsilon(1e-12));
    CHECK(expect_xm_pn(psi, 0, 4).real() ==
          doctest::Approx(3.0 / (16.0 * std::pow(sigma, 4))).epsilon(1e-11));

    // For a real wave function <x p> = i/2 regardless of the profile.
    const cd xp = expect_xm_pn(psi, 1, 1);
    CHECK(std::abs(xp - cd(0.0, 0.5)) < 1e-12);

    const WaveFunction off =
        make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 1.25, sigma});
    CHECK(expect_xm_pn(off, 1, 0).real() == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("free evolution spreads a gaussian by the ballistic law") {
    const Grid grid(512, 32.0);
    const double sigma = 0.5;
    const WaveFunction psi = make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 0.0, sigma});
    const PotentialSpec v = PotentialSpec::zero(grid);

    const double dt = 2e-4;
    const int steps = 2500;  // t = 0.5
    const WaveFunction evolved = evolve_split_step(psi, v, 1.0, dt, steps);
    const double t = dt * steps;

    CHECK(evolved.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const double var_expected =
        sigma * sigma + t * t / (4.0 * sigma * sigma);
    CHECK(expect_xm_pn(evolved, 2, 0).real() ==
          doctest::Approx(var_expected).epsilon(1e-10));
    // Kinetic-only propagation never touches the momentum density.
    CHECK(expect_xm_pn(evolved, 0, 2).real() ==
          doctest::Approx(expect_xm_pn(psi, 0, 2).real()).epsilon(1e-12));
}

TEST_CASE("split-step evolution through a barrier is unitary and reversible") {
    const Grid grid(512, 32.0);
    const WaveFunction psi =
        make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, -4.0, 0.6});
    const PotentialSpec v = PotentialSpec::barrier(grid, 0.0, 1.0, 2.0);

    const double dt = 2.5e-4;
    const int steps = 400;
    const WaveFunction fwd = evolve_split_step(boost(psi, 3.0), v, 1.0, dt, steps);
    CHECK(fwd.norm() == doctest::Approx(1.0).epsilon(1e-12));

    const WaveFunction back = evolve_split_step(fwd, v, 1.0, -dt, steps);
    CHECK(max_amp_diff(back, boost(psi, 3.0)) < 1e-11);

    // Zero steps is a no-op, not an error.
    CHECK(max_amp_diff(evolve_split_step(psi, v, 1.0, dt, 0), psi) == 0.0);
}

TEST_CASE("evolution guards reject unstable parameters") {
    const Grid grid(512, 32.0);
    const WaveFunction psi = make_lump(grid, LumpSpec{LumpSpec::Kind::gaussian, 0.0, 0.6});
    const PotentialSpec v = PotentialSpec::barrier(grid, 0.0, 1.0, 2.0);

    // Potential phase per step too large: dt * max|V| >= 0.1.
    const PotentialSpec tall = PotentialSpec::barrier(grid, 0.0, 1.0, 1000.0);
    CHECK_THROWS_AS(evolve_split_step(psi, tall, 1.0, 1e-3, 1), StabilityError);

    // Kinetic phase at the grid edge too large: p_max ~ 50 here.
    CHECK_THROWS_AS(evolve_split_step(psi, v, 1.0, 5e-4, 1), StabilityError);

    CHECK_THROWS_AS(evolve_split_step(psi, v, 0.0, 1e-4, 1), StabilityError);
    CHECK_THROWS_AS(evolve_split_step(psi, v, -1.0, 1e-4, 1), StabilityError);
    CHECK_THROWS_AS(evolve_split_step(psi, v, 1.0, 0.0, 1), StabilityError);
    CHECK_THROWS_AS(evolve_split_step(psi, v, 1.0, 1e-4, -1), StabilityError);

    const PotentialSpec mismatched = PotentialSpec::zero(Grid(256, 32.0));
    CHECK_THROWS_AS(evolve_split_step(psi, mismatched, 1.0, 1e-4, 1), GridError);
}

TEST_CASE("potential factories sample the advertised shapes") {
    const Grid grid(512, 32.0);

    const PotentialSpec b = PotentialSpec::barrier(grid, 0.0, 1.0, 2.5);
    CHECK(b.max_abs() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK_THROWS_AS(PotentialSpec::barrier(grid, 0.0, 0.0, 1.0), GridError);

    const PotentialSpec s = PotentialSpec::step(grid, 1.0, 3.0);
    CHECK(s.samples[grid.n_points() / 2] == 0.0);        // x = 0
    CHECK(s.samples[grid.n_points() - 1] == 3.0);        // right edge
    CHECK(s.max_abs() == doctest::Approx(3.0));

    const PotentialSpec comb = PotentialSpec::periodic_comb(grid, 8.0, 0.4);
    CHECK(comb.samples[grid.n_points() / 2] == doctest::Approx(0.4).epsilon(1e-14));
    // Period must land on the lattice and divide the ring.
    CHECK_THROWS_AS(PotentialSpec::periodic_comb(grid, 0.9, 0.4), GridError);
    CHECK_THROWS_AS(PotentialSpec::periodic_comb(grid, 32.0 / 3.0, 0.4), GridError);
}
