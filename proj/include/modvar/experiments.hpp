#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "modvar/measurement.hpp"
#include "modvar/modular.hpp"

namespace modvar {

// One named pass/fail check with its measured value and the tolerance it was
// judged against.
struct Verdict {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Density table serializable as CSV: column header axis_label,density.
struct Table {
    std::string name;
    std::string axis_label;  // "p_q" or "theta"
    std::vector<double> axis;
    std::vector<double> density;
};

// Generic labelled rows (JSON only; for per-checkpoint or per-order data).
struct Record {
    std::string name;
    std::map<std::string, double> fields;
};

struct ExperimentResult {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<Verdict> verdicts;
    std::map<std::string, double> scalars;
    std::map<std::string, std::string> provenance;  // conventions, version tag
    std::vector<Table> tables;
    std::vector<Record> records;
    std::vector<std::string> warnings;

    bool all_pass() const;
};

// Named tolerance overrides; every verdict tolerance can be re-pinned by name.
using Tolerances = std::map<std::string, double>;

// ---------------------------------------------------------------------------

// Which-path run: N particles pass one at a time through a two-path region
// (modes L, R), all prepared in R; a shared pointer couples to the path-swap
// operator at strength lambda/N; all particles are post-selected in
// (|L> + |R>)/sqrt(2). slit_open = false inserts a blocker in the L path
// between kick and post-selection. boundary = "absorber" records blocked
// particles on a plate; "reflector" routes them to an orthogonal lost mode
// (same conditional pointer, no plate record).
struct GedankenConfig {
    int n_particles = 100;
    double lambda = 0.1;
    bool slit_open = true;
    std::string boundary = "absorber";  // or "reflector"
    bool monte_carlo = false;
    long n_runs = 10000;
    int meter_points = 512;
    double meter_length = 40.0;
    double sigma_q = 0.5;  // pointer momentum spread 1/(2 sigma_q) = 1
    int threads = 1;
    Tolerances tolerances;
};
ExperimentResult run_gedanken(const GedankenConfig& cfg, std::uint64_t seed);

// Mach-Zehnder chain with three beam splitters. Stage labels: 1 = source arm,
// 2 = arms between BS1 and the mirrors (tilt plates live here), 4 = the two
// paths between BS2 and BS3 (the "slits"; optional blocker on the L path, and
// a pi phase plate on the R path ahead of BS3), 5 = output ports.
// Post-selection is port L5, the +1 eigenport of the slit-exchange operator.
// Weak values of the stage-2 path projectors are computed exactly and measured
// from the conditional transverse shift of a plate-tilted beam profile.
struct MachZehnderConfig {
    bool l4_blocked = false;
    double plate_tilt = 0.05;  // transverse shift per tilted plate, units of beam sigma
    bool monte_carlo = false;
    long n_photons = 20000;
    int meter_points = 512;
    double meter_length = 40.0;
    int threads = 1;
    Tolerances tolerances;
};
ExperimentResult run_mach_zehnder(const MachZehnderConfig& cfg, std::uint64_t seed);

// Two-lump interference moments: evolves (|L> + e^{i alpha}|R>)/sqrt(2) for a
// list of alphas, recording at each checkpoint the max over alpha pairs and
// moment orders m, n <= 4 of |<x^m p^n>_alpha - <x^m p^n>_beta| plus the
// lump-overlap monitor. Runs two phases: free flight (deltas stay zero at all
// times) and a barrier parked on the left lump (the phase-sensitivity control:
// once the scattered lumps reach each other the deltas become macroscopic).
struct Theorem1Config {
    std::string lump_kind = "gaussian";  // or "compact"
    double lump_sigma = 0.32;
    double separation = 8.0;
    std::vector<double> alphas = {0.0, kPi / 2, kPi, 2.2};
    double t_max = 2.5;
    int checkpoints = 10;
    int n_points = 1024;
    double grid_length = 64.0;
    double mass = 1.0;
    double dt = 2.5e-4;
    double barrier_height = 3.0;
    double barrier_halfwidth = 1.0;
    Tolerances tolerances;
};
ExperimentResult run_theorem1_suite(const Theorem1Config& cfg, std::uint64_t seed);

// Modular-momentum flatness: a lump narrower than the separation has a flat
// p-mod distribution (all fold coefficients vanish); a synthetic 1 + cos
// density is rejected; a plane wave has flat x-mod; the two-lump state shows
// |a_1| = 1/2.
struct FlatnessConfig {
    double separation = 1.0;
    int n_max = 8;
    double lump_sigma = 0.3;  // compact halfwidth, must stay below separation/2
    double lump_center = 0.25;
    int n_points = 4096;
    double grid_length = 64.0;
    Tolerances tolerances;
};
ExperimentResult run_flatness(const FlatnessConfig& cfg, std::uint64_t seed);

// Ring of n_slits lumps spaced `separation` apart with per-slit phase
// exp(i 2 pi flux_ratio j): momentum support sits on (2 pi / separation) *
// (integer + flux_ratio) (+ incident p), the interference pattern shifts by
// flux_ratio of a modular period, and flux_ratio -> flux_ratio + 1 reproduces
// the original pattern.
struct GratingConfig {
    int n_slits = 16;
    double separation = 1.0;
    double flux_ratio = 0.25;
    double incident_p = 0.0;
    int points_per_slit = 64;
    double slit_width_frac = 0.3;  // lump halfwidth as a fraction of separation
    Tolerances tolerances;
};
ExperimentResult run_grating_flux(const GratingConfig& cfg, std::uint64_t seed);

// (i) parity conservation under a symmetric double-bump potential for the
// alpha in {0, pi/2, pi} two-lump states; (ii) ellipse residuals for random
// momentum exchanges; (iii) a sweep transferring delta = 0..P0 in steps,
// checking the curve closes on itself.
struct ConservationConfig {
    long n_samples = 1000;
    double p_total = 1.7;  // P0
    int sweep_steps = 64;
    Tolerances tolerances;
};
ExperimentResult run_conservation_suite(const ConservationConfig& cfg,
                                        std::uint64_t seed);

// Orthonormality, shift eigenvalues b^{k-1}, and equal site weights of the
// Z(N) bases, both abstract and as grid lump superpositions, for each order.
struct ZnConfig {
    std::vector<int> orders = {2, 3, 5, 8};
    Tolerances tolerances;
};
ExperimentResult run_zn(const ZnConfig& cfg, std::uint64_t seed);

}  // namespace modvar
