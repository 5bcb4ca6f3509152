#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "modvar/measurement.hpp"
#include "modvar/modular.hpp"
#include "modvar/sampling.hpp"

using namespace modvar;

namespace {

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, cd(0, -1), cd(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Vector vec2(cd a, cd b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix random_hermitian(int dim, Philox4x32& rng, double scale = 1.0) {
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = cd(rng.normal(), rng.normal());
    Matrix h = 0.5 * (m + m.adjoint());
    return h * (scale / (1.0 + h.cwiseAbs().maxCoeff()));
}

Vector random_state(int dim, Philox4x32& rng) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cd(rng.normal(), rng.normal());
    return v / v.norm();
}

}  // namespace

TEST_CASE("gaussian meters report the textbook widths") {
    const Meter m = default_meter();
    CHECK(m.sigma_q == 0.5);
    CHECK(m.state.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(mean_q(m)) < 1e-13);
    CHECK(std::abs(mean_p(m)) < 1e-13);
    CHECK(var_q(m) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(var_p(m) == doctest::Approx(1.0).epsilon(1e-12));

    const Meter wide = Meter::gaussian(Grid(512, 40.0), 1.0);
    CHECK(var_q(wide) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(var_p(wide) == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(Meter::gaussian(Grid(512, 40.0), 0.0), GridError);
    CHECK_THROWS_AS(Meter::gaussian(Grid(512, 40.0), -1.0), GridError);
}

TEST_CASE("pointer momentum readout is an ascending axis consistent with mean_p") {
    // Modulating by e^{-i k q} shifts the pointer momentum by +k under the
    // mirrored readout convention.
    const Meter base = default_meter();
    const double kick = 0.7;
    std::vector<cd> amps = base.state.amps();
    for (int i = 0; i < base.state.grid().n_points(); ++i)
        amps[i] *= std::polar(1.0, -kick * base.state.grid().x(i));
    const Meter shifted{WaveFunction(base.state.grid(), std::move(amps)), base.sigma_q};
    CHECK(mean_p(shifted) == doctest::Approx(kick).epsilon(1e-12));

    const auto [axis, dens] = p_readout(shifted);
    REQUIRE(axis.size() == dens.size());
    const double dp = base.state.grid().dp();
    double mass = 0.0, mean = 0.0;
    for (size_t j = 0; j < axis.size(); ++j) {
        if (j > 0) CHECK(axis[j] - axis[j - 1] == doctest::Approx(dp).epsilon(1e-12));
        CHECK(dens[j] >= 0.0);
        mass += dens[j] * dp;
        mean += axis[j] * dens[j] * dp;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(mean_p(shifted)).epsilon(1e-10));
}

TEST_CASE("operator decomposition splits a state into mean plus spread") {
    const Matrix z = pauli_z();
    const Vector plus = vec2(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));

    const FiniteDecomposition d = theorem3_decompose(z, plus);
    CHECK(std::abs(d.stats.mean) < 1e-14);
    CHECK(d.stats.spread == doctest::Approx(1.0).epsilon(1e-13));
    const Vector& perp = d.require_perp();
    CHECK(std::abs(cd(plus.dot(perp))) < 1e-13);

    // Reconstruction: A|psi> = <A>|psi> + DeltaA |psi_perp>.
    const Vector rebuilt = d.stats.mean * plus + d.stats.spread * perp;
    CHECK((z * plus - rebuilt).cwiseAbs().maxCoeff() < 1e-13);

    // Eigenstates have zero spread and no orthogonal direction.
    const FiniteDecomposition e = theorem3_decompose(z, vec2(1.0, 0.0));
    CHECK(e.stats.mean == doctest::Approx(1.0));
    CHECK(e.stats.spread == 0.0);
    CHECK_FALSE(e.perp.has_value());
    CHECK_THROWS_AS(e.require_perp(), DegenerateError);

    Matrix bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(theorem3_decompose(bad, plus), SpectrumError);
}

TEST_CASE("operator decomposition round-trips on random instances") {
    Philox4x32 rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const int dim = 2 + static_cast<int>(rng.below(6));
        const Matrix a = random_hermitian(dim, rng, 2.0);
        const Vector psi = random_state(dim, rng);
        const FiniteDecomposition d = theorem3_decompose(a, psi);
        REQUIRE(d.perp.has_value());
        CHECK(std::abs(d.perp->norm() - 1.0) < 1e-12);
        CHECK(std::abs(cd(psi.dot(*d.perp))) < 1e-12);
        const Vector rebuilt = d.stats.mean * psi + d.stats.spread * *d.perp;
        CHECK((a * psi - rebuilt).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("wave-operator decomposition reproduces the two-lump parity statistics") {
    const Grid grid(1024, 64.0);
    const double alpha = 1.3;
    const WaveFunction psi =
        make_two_lump(grid, LumpSpec{LumpSpec::Kind::compact, 0.0, 1.0}, 8.0, alpha);

    const WaveDecomposition d = theorem3_decompose(
        [](const WaveFunction& s) { return parity_apply(s); }, psi);
    CHECK(d.stats.mean == doctest::Approx(std::cos(alpha)).epsilon(1e-12));
    CHECK(d.stats.spread ==
          doctest::Approx(std::abs(std::sin(alpha))).epsilon(1e-10));

    const WaveFunction& perp = d.require_perp();
    CHECK(perp.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inner(psi, perp)) < 1e-12);
    const WaveFunction ap = parity_apply(psi);
    for (int i = 0; i < grid.n_points(); ++i) {
        const cd rebuilt =
            d.stats.mean * psi.amps()[i] + d.stats.spread * perp.amps()[i];
        CHECK(std::abs(ap.amps()[i] - rebuilt) < 1e-12);
    }
}

TEST_CASE("projective readout follows the Born distribution") {
    const Matrix z = pauli_z();
    const Vector psi = vec2(0.6, 0.8);

    // Grouped spectrum is ascending with exact Born weights.
    const MeasurementOutcome probe = ideal_measure(z, psi, 1ULL);
    REQUIRE(probe.distinct_values.size() == 2);
    CHECK(probe.distinct_values[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(probe.distinct_values[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(probe.probabilities[0] == doctest::Approx(0.64).epsilon(1e-13));
    CHECK(probe.probabilities[1] == doctest::Approx(0.36).epsilon(1e-13));

    Philox4x32 rng(7);
    const int n = 100000;
    int plus = 0;
    for (int t = 0; t < n; ++t) {
        const MeasurementOutcome out = ideal_measure(z, psi, rng);
        if (out.eigenvalue > 0.0) ++plus;
        // The collapsed state is an eigenstate of the drawn eigenvalue.
        CHECK((z * out.collapsed - out.eigenvalue * out.collapsed)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
    const double freq = static_cast<double>(plus) / n;
    const double se = std::sqrt(0.36 * 0.64 / n);
    CHECK(std::abs(freq - 0.36) < 4.0 * se);

    // Same seed, same draw.
    const MeasurementOutcome a = ideal_measure(z, psi, 42ULL);
    const MeasurementOutcome b = ideal_measure(z, psi, 42ULL);
    CHECK(a.eigenvalue == b.eigenvalue);
    CHECK((a.collapsed - b.collapsed).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate outcomes collapse onto the full eigenspace") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(2, 2) = 2.0;
    Vector psi(3);
    psi << 0.6, cd(0.0, 0.8), 0.0;

    const MeasurementOutcome out = ideal_measure(a, psi, 5ULL);
    REQUIRE(out.distinct_values.size() == 2);
    CHECK(out.probabilities[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(out.eigenvalue == doctest::Approx(1.0));
    // Collapse keeps the in-eigenspace structure instead of picking one axis.
    CHECK(std::abs(out.collapsed(2)) < 1e-14);
    CHECK(std::abs(out.collapsed(0) - cd(0.6)) < 1e-13);
    CHECK(std::abs(out.collapsed(1) - cd(0.0, 0.8)) < 1e-13);
}

TEST_CASE("weak values reduce to eigenvalues and escape the spectrum") {
    const Matrix z = pauli_z();

    // Post-selecting an eigenstate pins the weak value to its eigenvalue.
    CHECK(std::abs(weak_value(z, vec2(0.8, 0.6), vec2(1.0, 0.0)) - cd(1.0)) <
          1e-13);
    CHECK(std::abs(weak_value(z, vec2(0.8, 0.6), vec2(0.0, 1.0)) - cd(-1.0)) <
          1e-13);

    // Nearly-orthogonal selections amplify far beyond the spectral radius.
    const double t = 0.99;
    const cd amplified = weak_value(z, vec2(1.0, t), vec2(1.0, -t));
    const double expected = (1.0 + t * t) / (1.0 - t * t);
    CHECK(amplified.real() == doctest::Approx(expected).epsilon(1e-10));
    CHECK(std::abs(amplified.imag()) < 1e-10);
    CHECK(std::abs(amplified) > 10.0);

    CHECK_THROWS_AS(weak_value(z, vec2(1.0, 0.0), vec2(0.0, 1.0)),
                    OrthogonalError);
    Matrix bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(weak_value(bad, vec2(1.0, 0.0), vec2(1.0, 1.0)),
                    SpectrumError);
}

TEST_CASE("probability-weighted weak values over a complete basis give the mean") {
    Philox4x32 rng(211);
    for (int dim = 2; dim <= 8; ++dim) {
        const Matrix a = random_hermitian(dim, rng, 1.5);
        const Vector in = random_state(dim, rng);

        // Random orthonormal final basis from a QR factorization.
        Matrix g(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) g(r, c) = cd(rng.normal(), rng.normal());
        const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();

        const WeakSumCheck chk = complete_weak_sum(a, in, q);
        CHECK(chk.residual < 1e-12);
        CHECK(std::abs(chk.weighted_sum - chk.expectation) < 1e-12);

        // The identity basis contains a column orthogonal to e_0: its zero
        // weight drops out without poisoning the sum.
        const WeakSumCheck id = complete_weak_sum(
            a, Vector::Unit(dim, 0), Matrix::Identity(dim, dim));
        CHECK(id.residual < 1e-13);
    }

    CHECK_THROWS_AS(
        complete_weak_sum(pauli_z(), vec2(1.0, 0.0), Matrix::Identity(3, 3)),
        SpectrumError);
}

TEST_CASE("weak coupling shifts the pointer by the real weak value") {
    // in = (0,1), fin = (|0>+|1>)/sqrt(2) under X: c(q) = e^{-i lambda q}
    // exactly, so the pointer momentum shift is exactly lambda.
    const Matrix x = pauli_x();
    PrePostEnsemble ens{vec2(0.0, 1.0), vec2(1.0, 1.0), 0.1, 1, 0};
    const WeakOutcome out = weak_couple_single(x, ens);

    CHECK(std::abs(out.weak_value - cd(1.0)) < 1e-13);
    CHECK(std::abs(out.shift_estimate - ens.lambda) < 1e-12);
    CHECK(std::abs(out.fin_in_overlap - cd(1.0 / std::sqrt(2.0))) < 1e-13);
    CHECK(out.postselect_prob == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.var_p_final == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(out.warnings.empty());

    PrePostEnsemble strong = ens;
    strong.lambda = 0.5;
    CHECK_FALSE(weak_couple_single(x, strong).warnings.empty());
}

TEST_CASE("imaginary weak values move the pointer position, not its momentum") {
    // in = (0,1), fin = (|0>+|1>)/sqrt(2) under Y gives A_w = -i and the real
    // amplitude factor cos(lambda q) - sin(lambda q): zero momentum shift and
    // a position shift of -2 lambda sigma_q^2 e^{-2 lambda^2 sigma_q^2}.
    const double lambda = 0.1;
    PrePostEnsemble ens{vec2(0.0, 1.0), vec2(1.0, 1.0), lambda, 1, 0};
    const WeakOutcome out = weak_couple_single(pauli_y(), ens);

    CHECK(std::abs(out.weak_value - cd(0.0, -1.0)) < 1e-13);
    CHECK(std::abs(out.shift_estimate) < 1e-13);

    const double sq = 0.5;
    const double expected_q =
        -2.0 * lambda * sq * sq * std::exp(-2.0 * lambda * lambda * sq * sq);
    CHECK(mean_q(out.meter_final) == doctest::Approx(expected_q).epsilon(1e-9));
}

TEST_CASE("conditional pointer variance grows by the coherent-mixture law") {
    // The post-selected pointer is the coherent amplitude sum of the binomial
    // kicks. At N = 1 the growth integrates in closed form to
    // lambda^2 / (1 + exp(-2 lambda^2 sigma_q^2)); a density mixture of the
    // same components would give lambda^2 instead.
    const Matrix x = pauli_x();
    const Meter meter = default_meter();
    const double base = var_p(meter);
    const double sq = meter.sigma_q;

    const double lambda = 0.25;
    PrePostEnsemble one{vec2(0.0, 1.0), vec2(0.0, 1.0), lambda, 1, 0};
    const WeakOutcome single = weak_couple_single(x, one, meter);
    const double exact =
        lambda * lambda /
        (1.0 + std::exp(-2.0 * lambda * lambda * sq * sq));
    CHECK(std::abs((single.var_p_final - base) - exact) < 1e-10);
    CHECK(std::abs(single.shift_estimate) < 1e-13);

    // Collective coupling at strength lambda/N: growth lambda^2 / (2N) with a
    // relative correction of order (lambda/N)^2 sigma_q^2.
    const double lam = 0.2;
    for (int n : {10, 50}) {
        PrePostEnsemble ens{vec2(0.0, 1.0), vec2(0.0, 1.0), lam, n, 0};
        const WeakOutcome out = collective_couple(x, ens, meter);
        const double growth = out.var_p_final - base;
        const double target = lam * lam / (2.0 * n);
        CHECK(std::abs(growth - target) < 0.01 * target + 1e-12);
    }
}

TEST_CASE("pointer variance growth scales as one over the ensemble size") {
    const Matrix x = pauli_x();
    const Meter meter = default_meter();
    const double base = var_p(meter);
    const double lam = 0.2;

    std::vector<double> lx, ly;
    for (int n : {4, 16, 64, 256}) {
        PrePostEnsemble ens{vec2(0.0, 1.0), vec2(0.0, 1.0), lam, n, 0};
        const double growth =
            collective_couple(x, ens, meter).var_p_final - base;
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(growth));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double m = static_cast<double>(lx.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("collective coupling matches the single-particle path at N = 1") {
    const Matrix x = pauli_x();
    PrePostEnsemble ens{vec2(0.3, 1.0), vec2(1.0, 0.4), 0.15, 1, 0};
    const WeakOutcome a = weak_couple_single(x, ens);
    const WeakOutcome b = collective_couple(x, ens);
    CHECK(a.shift_estimate == b.shift_estimate);
    CHECK(a.log_postselect_prob == b.log_postselect_prob);
    double diff = 0.0;
    for (size_t i = 0; i < a.meter_final.state.amps().size(); ++i)
        diff = std::max(diff, std::abs(a.meter_final.state.amps()[i] -
                                       b.meter_final.state.amps()[i]));
    CHECK(diff == 0.0);

    // The collective engine enforces the unit operator-norm contract.
    CHECK_THROWS_AS(collective_couple(2.0 * x, ens), NormBoundError);
    CHECK_NOTHROW(weak_couple_single(2.0 * x, ens));
    CHECK_THROWS_AS(weak_value(x, vec2(1.0, 0.0), vec2(0.0, 0.0)), SpectrumError);
}

TEST_CASE("mean shift over lambda converges quadratically to the weak value") {
    Philox4x32 rng(331);
    const Matrix a = random_hermitian(3, rng, 1.0);
    const Vector in = random_state(3, rng);
    Vector fin = random_state(3, rng);
    // Keep the selection overlap comfortably finite.
    fin = (fin + in).eval();
    fin /= fin.norm();

    const cd wv = weak_value(a, in, fin);
    auto err_at = [&](double lambda) {
        PrePostEnsemble ens{in, fin, lambda, 1, 0};
        const WeakOutcome out = weak_couple_single(a, ens);
        return std::abs(out.shift_estimate / lambda - wv.real());
    };
    const double e1 = err_at(0.05);
    const double e2 = err_at(0.01);
    // Quadratic convergence: error drops by (0.05/0.01)^2 = 25, allow slack.
    CHECK(e2 <= e1 / 25.0 * 1.8 + 1e-12);
}

TEST_CASE("disturbance report matches the closed-form rate") {
    // A = X on in = (0,1) with a unit-width meter: formula value
    // lambda^2 <q^2> / (1 + lambda^2 <q^2>), exact value (1 - e^{-2 lambda^2
    // sigma_q^2}) / 2.
    const Matrix x = pauli_x();
    const Meter meter = Meter::gaussian(Grid(512, 40.0), 1.0);
    const double lambda = 0.1;

    const DisturbanceReport rep =
        disturbance_probability(x, vec2(0.0, 1.0), lambda, meter);
    CHECK(rep.formula_value == doctest::Approx(0.01 / 1.01).epsilon(1e-12));
    const double exact = 0.5 * (1.0 - std::exp(-2.0 * lambda * lambda));
    CHECK(rep.exact_value == doctest::Approx(exact).epsilon(1e-10));

    // Eigenstates are never disturbed.
    const DisturbanceReport none =
        disturbance_probability(pauli_z(), vec2(1.0, 0.0), 0.3, meter);
    CHECK(none.formula_value == 0.0);
    CHECK(std::abs(none.exact_value) < 1e-12);
}

TEST_CASE("monte-carlo flip rate agrees with the exact disturbance probability") {
    const Matrix x = pauli_x();
    const Meter meter = default_meter();
    const double lambda = 0.2;
    const DisturbanceReport rep =
        disturbance_probability(x, vec2(0.0, 1.0), lambda, meter);

    const long trials = 20000;
    const McRate mc =
        mc_disturbance_rate(x, vec2(0.0, 1.0), lambda, meter, trials, 99);
    CHECK(mc.n_trials == trials);
    CHECK(std::abs(mc.rate - rep.exact_value) < 3.0 * mc.se);

    const McRate again =
        mc_disturbance_rate(x, vec2(0.0, 1.0), lambda, meter, trials, 99);
    CHECK(again.rate == mc.rate);
    CHECK_THROWS_AS(mc_disturbance_rate(x, vec2(0.0, 1.0), lambda, meter, 0, 1),
                    SpectrumError);
}

TEST_CASE("total disturbance compounds the per-particle rate") {
    const Matrix x = pauli_x();
    PrePostEnsemble ens{vec2(0.0, 1.0), vec2(0.0, 1.0), 0.3, 20, 0};
    const WeakOutcome out = collective_couple(x, ens);
    const double expected =
        1.0 - std::pow(1.0 - out.disturbance_exact, ens.n_particles);
    CHECK(out.total_disturbance == doctest::Approx(expected).epsilon(1e-13));
    // Formula and exact integral agree through fourth order in lambda/N.
    CHECK(std::abs(out.disturbance_exact - out.disturbance_formula) < 1e-8);
}

TEST_CASE("conditional meter bookkeeping stays in log space") {
    const Meter meter = default_meter();

    double log_prob = 0.0;
    const Meter flat = conditional_meter([](double) { return cd(0.8); }, 500,
                                         meter, &log_prob);
    CHECK(log_prob == doctest::Approx(2.0 * 500 * std::log(0.8)).epsilon(1e-12));
    // A constant amplitude factor leaves the normalized state untouched.
    double diff = 0.0;
    for (size_t i = 0; i < flat.state.amps().size(); ++i)
        diff = std::max(diff,
                        std::abs(flat.state.amps()[i] - meter.state.amps()[i]));
    CHECK(diff < 1e-13);

    CHECK_THROWS_AS(conditional_meter([](double) { return cd(0.0); }, 3, meter,
                                      nullptr),
                    OrthogonalError);
    CHECK_THROWS_AS(conditional_meter([](double) { return cd(1.0); }, 0, meter,
                                      nullptr),
                    SpectrumError);
}

TEST_CASE("inverse-cdf sampling maps uniform deviates onto the density") {
    const Grid grid(512, 40.0);
    std::vector<double> uniform(grid.n_points(), 1.0 / 40.0);
    const GridSampler flat(grid, uniform);
    CHECK(flat.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    // The map is affine: u = 0.5 lands at the box center.
    CHECK(std::abs(flat.sample(0.5)) < grid.dx());
    CHECK(flat.sample(0.25) == doctest::Approx(-10.0).epsilon(1e-2));
    double prev = flat.sample(0.0);
    for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double s = flat.sample(u);
        CHECK(s > prev);
        prev = s;
    }

    // Two separated spikes split the draws by their mass ratio.
    std::vector<double> spikes(grid.n_points(), 0.0);
    spikes[128] = 3.0;  // x = -10
    spikes[384] = 1.0;  // x = +10
    const GridSampler two(grid, spikes);
    Philox4x32 rng(17);
    int left = 0;
    const int n = 20000;
    for (int t = 0; t < n; ++t)
        if (two.sample(rng.uniform()) < 0.0) ++left;
    const double frac = static_cast<double>(left) / n;
    CHECK(std::abs(frac - 0.75) < 4.0 * std::sqrt(0.75 * 0.25 / n));

    CHECK_THROWS_AS(GridSampler(grid, std::vector<double>(3, 1.0)), GridError);
    CHECK_THROWS_AS(GridSampler(grid, std::vector<double>(512, 0.0)), GridError);
}
