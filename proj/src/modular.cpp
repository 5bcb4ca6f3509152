#include "modvar/modular.hpp"

#include <algorithm>
#include <cmath>

namespace modvar {

ModularParts decompose(double value, double period) {
    if (!(period > 0.0)) throw GridError("modular period must be positive");
    double q = std::floor(value / period);
    double r = value - q * period;
    // floor() rounding can leave r == period when value/period sits just below
    // an integer; fold that edge case back to 0.
    if (r >= period) {
        r -= period;
        q += 1.0;
    }
    if (r < 0.0) {
        r += period;
        q -= 1.0;
    }
    return {static_cast<long long>(q), r};
}

ModularDecomposition modular_decomposition(double p, double x, double separation) {
    if (!(separation > 0.0)) throw GridError("separation must be positive");
    const double period_p = kTwoPi / separation;
    const ModularParts pp = decompose(p, period_p);
    const ModularParts xx = decompose(x, separation);
    return {pp.quotient, pp.remainder, xx.quotient, xx.remainder,
            period_p, separation};
}

cd CircularDensity::fold_coefficient(int n) const {
    const double dw = bin_width();
    cd acc = 0.0;
    for (size_t b = 0; b < values.size(); ++b) {
        const double theta = static_cast<double>(b) * dw;
        acc += values[b] * std::polar(1.0, kTwoPi * n * theta / period);
    }
    return acc * dw;
}

double CircularDensity::mean_angle() const {
    const cd a1 = fold_coefficient(1);
    double ang = std::arg(a1) / kTwoPi * period;
    if (ang < 0.0) ang += period;
    return ang;
}

CircularDensity modular_momentum_distribution(const WaveFunction& psi,
                                              double separation) {
    const Grid& g = psi.grid();
    if (!(separation > 0.0)) throw GridError("separation must be positive");
    // The modular period 2 pi / separation must hold a whole number of momentum
    // bins: (2 pi / D) / dp = L / D.
    const double ratio = g.length() / separation;
    const double rounded = std::nearbyint(ratio);
    if (std::abs(ratio - rounded) > 1e-9 || rounded < 1.0)
        throw GridError("grid length is not a whole number of separations");
    const int m_bins = static_cast<int>(rounded);
    CircularDensity out;
    out.period = kTwoPi / separation;
    out.values.assign(m_bins, 0.0);
    const std::vector<double> dens = psi.momentum_density();
    for (int j = 0; j < g.n_points(); ++j) {
        const int r = ((g.momentum_index(j) % m_bins) + m_bins) % m_bins;
        out.values[r] += dens[j];  // bin width equals dp, so density carries over
    }
    return out;
}

CircularDensity modular_position_distribution(const WaveFunction& psi,
                                              double separation) {
    const Grid& g = psi.grid();
    const int m_bins = g.site_shift(separation, "separation");
    if (m_bins <= 0 || g.n_points() % m_bins != 0)
        throw GridError("separation must divide the grid length");
    CircularDensity out;
    out.period = separation;
    out.values.assign(m_bins, 0.0);
    const std::vector<double> dens = psi.position_density();
    for (int i = 0; i < g.n_points(); ++i) {
        // x_i = (i - n/2) dx: reduce the site index mod m_bins with the same
        // origin so that theta = x mod D exactly.
        const int r = (((i - g.n_points() / 2) % m_bins) + m_bins) % m_bins;
        out.values[r] += dens[i];
    }
    return out;
}

FlatnessReport fourier_flatness(const CircularDensity& density, int n_max,
                                double tolerance) {
    if (n_max < 1) throw GridError("flatness needs n_max >= 1");
    FlatnessReport rep;
    rep.tolerance = tolerance;
    rep.coefficients.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        const cd a = density.fold_coefficient(n);
        rep.coefficients.push_back(a);
        rep.max_abs = std::max(rep.max_abs, std::abs(a));
    }
    rep.flat = rep.max_abs < tolerance;
    return rep;
}

WaveFunction parity_apply(const WaveFunction& psi) {
    const Grid& g = psi.grid();
    const int n = g.n_points();
    std::vector<cd> out(n);
    for (int i = 0; i < n; ++i) out[i] = psi.amps()[(n - i) % n];
    return WaveFunction(g, std::move(out));
}

cd parity_expectation(const WaveFunction& psi) {
    return inner(psi, parity_apply(psi));
}

double parity_spread(const WaveFunction& psi) {
    const WaveFunction p_psi = parity_apply(psi);
    const double mean = inner(psi, p_psi).real();
    const double second = inner(psi, parity_apply(p_psi)).real();
    const double var = second - mean * mean;
    return std::sqrt(std::max(0.0, var));
}

EomResidual eom_residual(const WaveFunction& psi, const PotentialSpec& potential,
                         double mass, double displacement, double dt) {
    const Grid& g = psi.grid();
    const int n = g.n_points();
    const int s = g.site_shift(displacement, "displacement");
    if (static_cast<int>(potential.samples.size()) != n)
        throw GridError("potential sample count does not match grid");

    const WaveFunction fwd = evolve_split_step(psi, potential, mass, dt, 1);
    const WaveFunction bwd = evolve_split_step(psi, potential, mass, -dt, 1);
    const cd numeric = (translation_expectation(fwd, displacement) -
                        translation_expectation(bwd, displacement)) /
                       (2.0 * dt);

    // Kinetic commutator in momentum space: both p^2/2m and e^{ipD} are
    // diagonal there, so each bin contributes |psi~|^2 (E_j - E_j) e^{ip_jD}.
    // Evaluated literally to document the exact zero rather than assumed.
    const std::vector<double> mdens = psi.momentum_density();
    cd kinetic = 0.0;
    for (int j = 0; j < n; ++j) {
        const double e_j = g.p(j) * g.p(j) / (2.0 * mass);
        const double phase = kTwoPi * g.momentum_index(j) * s / static_cast<double>(n);
        kinetic += mdens[j] * (e_j - e_j) * std::polar(1.0, phase);
    }
    kinetic *= cd(0.0, 1.0) * g.dp();

    // Potential part: i <psi| (V(x) - V(x+D)) e^{ipD} |psi>.
    cd analytic = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = (((i + s) % n) + n) % n;
        analytic += std::conj(psi.amps()[i]) *
                    (potential.samples[i] - potential.samples[k]) * psi.amps()[k];
    }
    analytic *= cd(0.0, 1.0) * g.dx();
    analytic += kinetic;

    return {numeric, analytic, kinetic, std::abs(numeric - analytic)};
}

ZnBasis zn_basis(int n_slits) {
    if (n_slits < 2) throw GridError("Z(N) basis needs n_slits >= 2");
    ZnBasis basis;
    basis.n_slits = n_slits;
    basis.b = std::polar(1.0, -kTwoPi / n_slits);
    basis.chi = Eigen::MatrixXcd(n_slits, n_slits);
    basis.shift = Eigen::MatrixXcd::Zero(n_slits, n_slits);
    const double w = 1.0 / std::sqrt(static_cast<double>(n_slits));
    for (int k = 0; k < n_slits; ++k) {
        for (int j = 0; j < n_slits; ++j)
            basis.chi(j, k) = w * std::polar(1.0, -kTwoPi * k * j / n_slits);
        basis.eigenvalues.push_back(std::polar(1.0, -kTwoPi * k / n_slits));
    }
    // (shift c)_j = c_{j+1 mod N}.
    for (int j = 0; j < n_slits; ++j)
        basis.shift(j, (j + 1) % n_slits) = 1.0;
    return basis;
}

ZnGridStates zn_grid_states(const Grid& grid, const LumpSpec& lump, int order) {
    if (order < 2) throw GridError("Z(N) realization needs order >= 2");
    const double spacing = grid.length() / order;
    const int s = grid.site_shift(spacing, "spacing");
    if (s * order != grid.n_points())
        throw GridError("order must divide the grid size");
    if (spacing <= 2.0 * lump.window_halfwidth())
        throw OverlapError("lump windows overlap at spacing " +
                           std::to_string(spacing));

    // Site lumps on the ring: centers -L/2 + (j + 1/2) spacing, generated by
    // exact index shifts so translation permutes them verbatim.
    LumpSpec site = lump;
    site.center = -grid.length() / 2.0 + spacing / 2.0;
    std::vector<WaveFunction> lumps;
    lumps.reserve(order);
    lumps.push_back(make_lump(grid, site));
    for (int j = 1; j < order; ++j)
        lumps.push_back(apply_translation(lumps.back(), -spacing));

    ZnGridStates out;
    out.order = order;
    out.spacing = spacing;
    const double w = 1.0 / std::sqrt(static_cast<double>(order));
    for (int k = 0; k < order; ++k) {
        std::vector<cd> amps(grid.n_points(), 0.0);
        for (int j = 0; j < order; ++j) {
            const cd coeff = w * std::polar(1.0, -kTwoPi * k * j / order);
            for (int i = 0; i < grid.n_points(); ++i)
                amps[i] += coeff * lumps[j].amps()[i];
        }
        out.states.emplace_back(grid, std::move(amps));
        out.eigenvalues.push_back(std::polar(1.0, -kTwoPi * k / order));
    }
    return out;
}

EllipsePoint ellipse_point(double p1, double p2, double p0) {
    if (!(p0 > 0.0)) throw GridError("ellipse period P0 must be positive");
    EllipsePoint pt;
    pt.theta1 = decompose(kTwoPi * p1 / p0, kTwoPi).remainder;
    pt.theta2 = decompose(kTwoPi * p2 / p0, kTwoPi).remainder;
    pt.pi1 = std::cos(pt.theta1);
    pt.pi2 = std::cos(pt.theta2);
    pt.s = decompose(pt.theta1 + pt.theta2, kTwoPi).remainder;
    const double lhs = pt.pi1 * pt.pi1 + pt.pi2 * pt.pi2 -
                       2.0 * std::cos(pt.s) * pt.pi1 * pt.pi2;
    const double rhs = 1.0 - std::cos(pt.s) * std::cos(pt.s);
    pt.residual = std::abs(lhs - rhs);
    return pt;
}

EllipseCheck ellipse_check(double p1, double p2, double p1_new, double p2_new,
                           double p0) {
    const double before = p1 + p2;
    const double after = p1_new + p2_new;
    const double span = std::max({1.0, std::abs(p1), std::abs(p2),
                                  std::abs(p1_new), std::abs(p2_new)});
    if (std::abs(before - after) > 1e-12 * span)
        throw ConservationError("momentum exchange changes the total: " +
                                std::to_string(before) + " -> " +
                                std::to_string(after));
    EllipseCheck out{ellipse_point(p1, p2, p0), ellipse_point(p1_new, p2_new, p0),
                     0.0};
    out.residual = std::max(out.before.residual, out.after.residual);
    return out;
}

}  // namespace modvar
