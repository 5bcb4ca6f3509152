#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "modvar/wavespace.hpp"

namespace modvar {

// value = quotient * period + remainder, remainder in [0, period) (floor
// convention, valid for negative values too).
struct ModularParts {
    long long quotient;
    double remainder;
};
ModularParts decompose(double value, double period);

// Joint integer/remainder split of a (p, x) pair against a slit separation D:
// p = n_p (2 pi / D) + p_mod and x = n_x D + x_mod.
struct ModularDecomposition {
    long long n_p;
    double p_mod;
    long long n_x;
    double x_mod;
    double period_p;  // 2 pi / D
    double period_x;  // D
};
ModularDecomposition modular_decomposition(double p, double x, double separation);

// Density on a circle of circumference `period`, sampled at bin_width()
// intervals starting at 0; sum(values) * bin_width() == 1.
struct CircularDensity {
    double period = 0.0;
    std::vector<double> values;

    double bin_width() const {
        return period / static_cast<double>(values.size());
    }
    // a_n = integral rho(theta) exp(+i n 2 pi theta / period) dtheta; a_0 = 1.
    cd fold_coefficient(int n) const;
    double mean_angle() const;  // circular mean, arg(a_1) mapped to [0, period)
};

// Distribution of p mod (2 pi / separation); separation must divide the grid
// length (the modular period must be a whole number of momentum bins).
CircularDensity modular_momentum_distribution(const WaveFunction& psi,
                                              double separation);

// Distribution of x mod separation; separation must be a lattice multiple of dx
// dividing the grid size.
CircularDensity modular_position_distribution(const WaveFunction& psi,
                                              double separation);

struct FlatnessReport {
    bool flat = false;
    std::vector<cd> coefficients;  // a_1 .. a_n_max
    double tolerance = 0.0;
    double max_abs = 0.0;
};
// Flat iff |a_n| < tolerance for every n in 1..n_max.
FlatnessReport fourier_flatness(const CircularDensity& density, int n_max,
                                double tolerance = 1e-10);

// psi(x) -> psi(-x) by exact index reflection about the slit midpoint x = 0
// (the x = -L/2 edge site maps to itself under the periodic wrap).
WaveFunction parity_apply(const WaveFunction& psi);
cd parity_expectation(const WaveFunction& psi);
// sqrt(<P^2> - <P>^2), both moments evaluated by explicit reflection.
double parity_spread(const WaveFunction& psi);

// Compares d<e^{i p D}>/dt measured by centered-difference split-step evolution
// against i <[H, e^{i p D}]>. The kinetic part of the commutator is evaluated
// exactly in momentum space (where it vanishes identically); the potential part
// is i <psi| (V(x) - V(x+D)) e^{i p D} |psi>. The derivative couples psi(x) to
// psi(x+D): it vanishes for any state narrower than D whatever the potential,
// and is nonzero only when amplitudes a displacement D apart simultaneously
// sample a varying V.
struct EomResidual {
    cd numeric_derivative;
    cd analytic_derivative;
    cd kinetic_term;  // momentum-space commutator contribution; exactly 0
    double residual;  // |numeric - analytic|
};
EomResidual eom_residual(const WaveFunction& psi, const PotentialSpec& potential,
                         double mass, double displacement, double dt);

// Discrete Fourier basis chi(k), k = 1..N, over the N-dimensional slit space:
// chi(k)_j = b^{(k-1) j} / sqrt(N) with b = exp(-2 pi i / N) and j = 0..N-1
// indexing slit |Psi(j+1)>. Each chi(k) is an eigenvector of the cyclic shift
// (shift * c)_j = c_{j+1 mod N} with eigenvalue b^{k-1}, and every slit state
// has weight 1/sqrt(N) in every chi(k).
struct ZnBasis {
    int n_slits = 0;
    cd b;
    Eigen::MatrixXcd chi;    // column k-1 holds chi(k)
    Eigen::MatrixXcd shift;  // cyclic shift matrix
    std::vector<cd> eigenvalues;
};
ZnBasis zn_basis(int n_slits);

// Grid realization of the same basis: N disjoint lumps on a ring of N sites
// spaced `spacing` = L/N apart; chi_k is an exact eigenstate of
// apply_translation(., +spacing) with the same eigenvalue b^{k-1}.
struct ZnGridStates {
    int order = 0;
    double spacing = 0.0;
    std::vector<WaveFunction> states;
    std::vector<cd> eigenvalues;
};
ZnGridStates zn_grid_states(const Grid& grid, const LumpSpec& lump, int order);

// One point on the modular conservation ellipse: angles theta_i = 2 pi P_i / P0
// reduced mod 2 pi, coordinates pi_i = cos(theta_i), and the residual of
//   pi1^2 + pi2^2 - 2 cos(s) pi1 pi2 = 1 - cos^2(s),  s = theta1 + theta2.
struct EllipsePoint {
    double theta1, theta2;
    double pi1, pi2;
    double s;
    double residual;
};
EllipsePoint ellipse_point(double p1, double p2, double p0);

// Momentum exchange (P1, P2) -> (P1p, P2p): both points carry the same s, so
// they lie on one ellipse. Throws ConservationError when P1+P2 != P1p+P2p
// within 1e-12 (relative to the momentum scale).
struct EllipseCheck {
    EllipsePoint before, after;
    double residual;  // max of the two identity residuals
};
EllipseCheck ellipse_check(double p1, double p2, double p1_new, double p2_new,
                           double p0);

}  // namespace modvar
