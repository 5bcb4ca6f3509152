#pragma once

#include <string>
#include <vector>

#include "modvar/wavefunction.hpp"

namespace modvar {

// A single localized lump. "gaussian" has amplitude exp(-(x-c)^2 / (4 sigma^2))
// (so sigma is the position spread) truncated to zero outside a window of
// halfwidth 12 sigma; "compact" is the bump exp(-1 / (1 - u^2)), u = (x-c)/sigma,
// identically zero outside |u| < 1. Window edges define the support used by
// disjointness checks.
struct LumpSpec {
    enum class Kind { gaussian, compact };
    Kind kind = Kind::compact;
    double center = 0.0;
    double sigma = 1.0;

    double window_halfwidth() const {
        return kind == Kind::gaussian ? 12.0 * sigma : sigma;
    }
};

// Normalized single lump sampled on the grid. Throws GridError when the lump
// window does not fit inside the grid or sigma <= 0.
WaveFunction make_lump(const Grid& grid, const LumpSpec& spec);

// (|left> + e^{i alpha} |right>) / sqrt(2), with the left lump centered at
// +separation/2 and the right lump at -separation/2 (the right lump is the one
// a translation by -separation carries onto the left one). Throws OverlapError
// when the two windows intersect, GridError when separation is not a lattice
// multiple of dx.
WaveFunction make_two_lump(const Grid& grid, const LumpSpec& lump,
                           double separation, double alpha);

// e^{i p a} |psi>: psi(x) -> psi(x + a). Exact cyclic index shift; a must be a
// lattice multiple of dx.
WaveFunction apply_translation(const WaveFunction& psi, double a);

// e^{i delta_p x} |psi>: rigid momentum shift by delta_p (any real value).
WaveFunction boost(const WaveFunction& psi, double delta_p);

// <e^{i p d}> = sum_j |psi~(p_j)|^2 e^{i p_j d} dp; d must be a lattice multiple.
cd translation_expectation(const WaveFunction& psi, double d);

// <x^m p^n> with the operator ordering x^m p^n (position moment of p^n psi).
// Orders are guarded: m, n in [0, 8], else OrderOverflowError.
cd expect_xm_pn(const WaveFunction& psi, int m, int n);

// Real potential sampled on the grid, with a descriptor naming its family.
struct PotentialSpec {
    std::string descriptor;
    std::vector<double> samples;

    static PotentialSpec zero(const Grid& grid);
    // Gaussian bump of the given height centered at `center`:
    // V = height * exp(-(x-center)^2 / (2 halfwidth^2)).
    static PotentialSpec barrier(const Grid& grid, double center,
                                 double halfwidth, double height,
                                 std::string descriptor = "barrier");
    // amplitude * cos(2 pi x / period); period must divide the grid length so
    // that V(x + period) = V(x) holds exactly on the lattice.
    static PotentialSpec periodic_comb(const Grid& grid, double period,
                                       double amplitude);
    // 0 for x < edge, height for x >= edge.
    static PotentialSpec step(const Grid& grid, double edge, double height);

    double max_abs() const;
};

// Symmetric split-step (Strang) propagator for H = p^2 / (2 mass) + V(x).
// Unitary per step to rounding. Guards (StabilityError):
//   dt * max|V| < 0.1         (potential phase per half-step stays small)
//   dt * p_max^2 / (2 mass) < 0.5  (kinetic phase at the grid edge stays small)
WaveFunction evolve_split_step(const WaveFunction& psi, const PotentialSpec& potential,
                               double mass, double dt, int steps);

}  // namespace modvar
