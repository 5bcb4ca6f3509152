#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modvar/rng.hpp"
#include "modvar/wavefunction.hpp"

namespace modvar {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Pointer degree of freedom: a state over the readout coordinate q plus the
// width it was built with. gaussian() uses amplitude exp(-q^2 / (4 sigma_q^2)),
// so Delta q = sigma_q and Delta p_q = 1 / (2 sigma_q); sigma_q = 1/2 gives the
// unit-momentum-spread pointer used by the interference runs.
//
// Pointer-momentum convention: the readout pair is defined through
// Phi(p_q) = (2 pi)^{-1/2} integral Phi(q) exp(+i p_q q) dq, so the coupling
// kernel e^{-i lambda q A} moves the p_q distribution of an eigenstate with
// eigenvalue a by +lambda a.
struct Meter {
    WaveFunction state;
    double sigma_q = 0.0;

    static Meter gaussian(const Grid& grid, double sigma_q);
};

// 512-point grid of length 40, sigma_q = 1/2.
Meter default_meter();

double mean_q(const Meter& m);
double var_q(const Meter& m);
double mean_p(const Meter& m);
double var_p(const Meter& m);
// Pointer-momentum density as ascending (axis, density) columns.
std::pair<std::vector<double>, std::vector<double>> p_readout(const Meter& m);

struct MeanSpread {
    double mean;    // <A>
    double spread;  // sqrt(<A^2> - <A>^2)
};

// A|psi> = <A>|psi> + DeltaA |psi_perp>. perp is empty when the spread falls
// below 1e-14 * scale(A) (psi is an eigenvector; the spread is reported as
// exactly 0 and no direction exists). Throws SpectrumError if A is not
// Hermitian.
struct FiniteDecomposition {
    MeanSpread stats;
    std::optional<Vector> perp;

    const Vector& require_perp() const;  // DegenerateError when absent
};
FiniteDecomposition theorem3_decompose(const Matrix& A, const Vector& state);

// Same decomposition for an operator acting on grid states.
struct WaveDecomposition {
    MeanSpread stats;
    std::optional<WaveFunction> perp;

    const WaveFunction& require_perp() const;
};
WaveDecomposition theorem3_decompose(
    const std::function<WaveFunction(const WaveFunction&)>& op,
    const WaveFunction& state);

// Projective measurement of Hermitian A: samples one outcome from the Born
// distribution, collapses onto the (possibly degenerate) eigenspace.
// distinct_values/probabilities list the grouped spectrum.
struct MeasurementOutcome {
    double eigenvalue;
    Vector collapsed;
    std::vector<double> distinct_values;
    std::vector<double> probabilities;
};
MeasurementOutcome ideal_measure(const Matrix& A, const Vector& state,
                                 Philox4x32& rng);
MeasurementOutcome ideal_measure(const Matrix& A, const Vector& state,
                                 std::uint64_t seed);

// <fin|A|in> / <fin|in>. Throws OrthogonalError when |<fin|in>| < 1e-12 after
// normalization.
cd weak_value(const Matrix& A, const Vector& in, const Vector& fin);

// sum_j p_j A_w^(j) over any orthonormal set of final states (columns of
// final_basis) equals <in|A|in>; residual reports how well the computed
// weighted sum reproduces the expectation.
struct WeakSumCheck {
    cd weighted_sum;
    cd expectation;
    double residual;
};
WeakSumCheck complete_weak_sum(const Matrix& A, const Vector& in,
                               const Matrix& final_basis);

// Pre/post-selected ensemble of n_particles identical systems, each coupled to
// the shared pointer at strength lambda / n_particles.
struct PrePostEnsemble {
    Vector in;
    Vector fin;
    double lambda = 0.0;
    int n_particles = 1;
    std::uint64_t seed = 0;
};

struct WeakOutcome {
    Meter meter_final;           // normalized conditional pointer state
    cd weak_value;               // <fin|A|in> / <fin|in>
    cd fin_in_overlap;           // <fin|in> of the normalized selection states
    double postselect_prob;      // clamped into [0,1]; underflows for large N
    double log_postselect_prob;  // always finite
    double shift_estimate;       // conditional pointer-momentum mean
    double shift_se;             // 0 for the exact engine; filled by MC callers
    double var_p_final;
    // Per-particle probability that the kick alone changes the system state,
    // both the small-lambda formula and the exact integral, plus the exact
    // probability that at least one of the N particles is disturbed.
    double disturbance_formula;
    double disturbance_exact;
    double total_disturbance;
    std::vector<std::string> warnings;
};

// Impulsive coupling exp(-i lambda q A) between one system and the pointer,
// then post-selection: the pointer amplitude gains the factor
// c(q) = <fin| e^{-i lambda q A} |in> / <fin|in>. Warns when lambda > 0.3.
WeakOutcome weak_couple_single(const Matrix& A, const PrePostEnsemble& ensemble,
                               const Meter& meter);
WeakOutcome weak_couple_single(const Matrix& A, const PrePostEnsemble& ensemble);

// N particles coupled at strength lambda/N to one pointer, all post-selected:
// the pointer amplitude gains c(q)^N. Requires operator norm <= 1
// (NormBoundError) so lambda bounds the total pointer kick; warns when
// lambda^2/N is large. n_particles = 1 reproduces weak_couple_single
// bit-for-bit (same code path).
WeakOutcome collective_couple(const Matrix& A, const PrePostEnsemble& ensemble,
                              const Meter& meter);
WeakOutcome collective_couple(const Matrix& A, const PrePostEnsemble& ensemble);

// Conditional pointer state when each of n_particles contributes an amplitude
// factor c(q) (shared engine for couplings that are not plain e^{-i theta A},
// e.g. a kick followed by an absorber projection). The factor is rescaled by
// its largest magnitude before exponentiation; the post-selection probability
// is accumulated in log form.
Meter conditional_meter(const std::function<cd(double)>& c_of_q, int n_particles,
                        const Meter& meter, double* log_prob_out = nullptr);

// Probability that coupling at strength lambda changes the system state:
//   formula_value: lambda^2 <q^2> Var(A) / (1 + lambda^2 <q^2> <A^2>)
//   exact_value:   1 - integral |Phi(q)|^2 |<in|e^{-i lambda q A}|in>|^2 dq
// The formula is the small-lambda model; both agree to O(lambda^4).
struct DisturbanceReport {
    double formula_value;
    double exact_value;
};
DisturbanceReport disturbance_probability(const Matrix& A, const Vector& in,
                                          double lambda, const Meter& meter);

// Monte Carlo: sample q from |Phi|^2, apply the kick, measure whether the
// system left |in> (Born rule). rate estimates DisturbanceReport::exact_value.
struct McRate {
    double rate;
    double se;
    long n_trials;
};
McRate mc_disturbance_rate(const Matrix& A, const Vector& in, double lambda,
                           const Meter& meter, long n_trials,
                           std::uint64_t seed);

}  // namespace modvar
