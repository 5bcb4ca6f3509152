#include "modvar/wavespace.hpp"

#include <algorithm>
#include <cmath>

namespace modvar {
namespace {

double lump_amp(const LumpSpec& spec, double x) {
    const double u = (x - spec.center) / spec.sigma;
    if (spec.kind == LumpSpec::Kind::gaussian) {
        if (std::abs(u) >= 12.0) return 0.0;
        return std::exp(-0.25 * u * u);
    }
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

}  // namespace

WaveFunction make_lump(const Grid& grid, const LumpSpec& spec) {
    if (!(spec.sigma > 0.0)) throw GridError("lump sigma must be positive");
    const double w = spec.window_halfwidth();
    const double half = grid.length() / 2.0;
    if (spec.center - w < -half || spec.center + w > half)
        throw GridError("lump window [" + std::to_string(spec.center - w) + ", " +
                        std::to_string(spec.center + w) +
                        "] does not fit inside the grid");
    std::vector<cd> amps(grid.n_points());
    for (int i = 0; i < grid.n_points(); ++i)
        amps[i] = lump_amp(spec, grid.x(i));
    WaveFunction psi(grid, std::move(amps));
    return psi.normalize();
}

WaveFunction make_two_lump(const Grid& grid, const LumpSpec& lump,
                           double separation, double alpha) {
    if (!(separation > 0.0)) throw GridError("separation must be positive");
    grid.site_shift(separation, "separation");
    const double w = lump.window_halfwidth();
    if (separation <= 2.0 * w)
        throw OverlapError("lump windows of halfwidth " + std::to_string(w) +
                           " overlap at separation " + std::to_string(separation));
    LumpSpec left = lump;
    left.center = separation / 2.0;
    LumpSpec right = lump;
    right.center = -separation / 2.0;
    const WaveFunction psi_l = make_lump(grid, left);
    const WaveFunction psi_r = make_lump(grid, right);
    const cd phase = std::polar(1.0, alpha);
    std::vector<cd> amps(grid.n_points());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < grid.n_points(); ++i)
        amps[i] = inv_sqrt2 * (psi_l.amps()[i] + phase * psi_r.amps()[i]);
    return WaveFunction(grid, std::move(amps));
}

WaveFunction apply_translation(const WaveFunction& psi, double a) {
    const Grid& g = psi.grid();
    const int n = g.n_points();
    const int s = g.site_shift(a, "translation");
    std::vector<cd> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = psi.amps()[(((i + s) % n) + n) % n];
    return WaveFunction(g, std::move(out));
}

WaveFunction boost(const WaveFunction& psi, double delta_p) {
    const Grid& g = psi.grid();
    std::vector<cd> out(g.n_points());
    for (int i = 0; i < g.n_points(); ++i)
        out[i] = psi.amps()[i] * std::polar(1.0, delta_p * g.x(i));
    return WaveFunction(g, std::move(out));
}

cd translation_expectation(const WaveFunction& psi, double d) {
    const Grid& g = psi.grid();
    const int n = g.n_points();
    const int s = g.site_shift(d, "displacement");
    const std::vector<double> dens = psi.momentum_density();
    // p_j d = 2 pi m_j s / n exactly, so the phase never loses precision to a
    // large intermediate product.
    cd acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double phase = kTwoPi * g.momentum_index(j) * s / static_cast<double>(n);
        acc += dens[j] * std::polar(1.0, phase);
    }
    return acc * g.dp();
}

cd expect_xm_pn(const WaveFunction& psi, int m, int n) {
    if (m < 0 || n < 0 || m > 8 || n > 8)
        throw OrderOverflowError("moment orders must lie in [0, 8], got m = " +
                                 std::to_string(m) + ", n = " + std::to_string(n));
    const Grid& g = psi.grid();
    const int np = g.n_points();
    std::vector<cd> pn_psi;
    if (n == 0) {
        pn_psi = psi.amps();
    } else {
        std::vector<cd> mom = psi.momentum_amps();
        for (int j = 0; j < np; ++j) mom[j] *= ipow(g.p(j), n);
        pn_psi = to_position(g, mom);
    }
    cd acc = 0.0;
    for (int i = 0; i < np; ++i)
        acc += std::conj(psi.amps()[i]) * ipow(g.x(i), m) * pn_psi[i];
    return acc * g.dx();
}

PotentialSpec PotentialSpec::zero(const Grid& grid) {
    return {"zero", std::vector<double>(grid.n_points(), 0.0)};
}

PotentialSpec PotentialSpec::barrier(const Grid& grid, double center,
                                     double halfwidth, double height,
                                     std::string descriptor) {
    if (!(halfwidth > 0.0)) throw GridError("barrier halfwidth must be positive");
    std::vector<double> v(grid.n_points());
    for (int i = 0; i < grid.n_points(); ++i) {
        const double u = (grid.x(i) - center) / halfwidth;
        v[i] = height * std::exp(-0.5 * u * u);
    }
    return {std::move(descriptor), std::move(v)};
}

PotentialSpec PotentialSpec::periodic_comb(const Grid& grid, double period,
                                           double amplitude) {
    const int s = grid.site_shift(period, "comb period");
    if (s <= 0 || grid.n_points() % s != 0)
        throw GridError("comb period must divide the grid length");
    std::vector<double> v(grid.n_points());
    for (int i = 0; i < grid.n_points(); ++i)
        v[i] = amplitude * std::cos(kTwoPi * grid.x(i) / period);
    return {"periodic comb", std::move(v)};
}

PotentialSpec PotentialSpec::step(const Grid& grid, double edge, double height) {
    std::vector<double> v(grid.n_points());
    for (int i = 0; i < grid.n_points(); ++i)
        v[i] = grid.x(i) >= edge ? height : 0.0;
    return {"step", std::move(v)};
}

double PotentialSpec::max_abs() const {
    double m = 0.0;
    for (double v : samples) m = std::max(m, std::abs(v));
    return m;
}

WaveFunction evolve_split_step(const WaveFunction& psi, const PotentialSpec& potential,
                               double mass, double dt, int steps) {
    const Grid& g = psi.grid();
    const int n = g.n_points();
    if (static_cast<int>(potential.samples.size()) != n)
        throw GridError("potential sample count does not match grid");
    if (!(mass > 0.0)) throw StabilityError("mass must be positive");
    if (steps < 0) throw StabilityError("step count must be non-negative");
    if (dt == 0.0 || !std::isfinite(dt)) throw StabilityError("dt must be finite and nonzero");
    const double adt = std::abs(dt);
    const double vmax = potential.max_abs();
    if (adt * vmax >= 0.1)
        throw StabilityError("dt * max|V| = " + std::to_string(adt * vmax) +
                             " exceeds the 0.1 phase guard");
    const double kin_edge = adt * g.p_max() * g.p_max() / (2.0 * mass);
    if (kin_edge >= 0.5)
        throw StabilityError("dt * p_max^2 / (2 m) = " + std::to_string(kin_edge) +
                             " exceeds the 0.5 phase guard");

    std::vector<cd> half_v(n), kin(n);
    for (int i = 0; i < n; ++i)
        half_v[i] = std::polar(1.0, -0.5 * dt * potential.samples[i]);
    for (int j = 0; j < n; ++j)
        kin[j] = std::polar(1.0, -dt * g.p(j) * g.p(j) / (2.0 * mass));

    std::vector<cd> amps = psi.amps();
    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < n; ++i) amps[i] *= half_v[i];
        std::vector<cd> mom = to_momentum(g, amps);
        for (int j = 0; j < n; ++j) mom[j] *= kin[j];
        amps = to_position(g, mom);
        for (int i = 0; i < n; ++i) amps[i] *= half_v[i];
    }
    return WaveFunction(g, std::move(amps));
}

}  // namespace modvar
