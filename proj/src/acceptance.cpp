#include "modvar/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "modvar/experiments.hpp"
#include "modvar/measurement.hpp"
#include "modvar/modular.hpp"
#include "modvar/rng.hpp"
#include "modvar/sampling.hpp"
#include "modvar/wavespace.hpp"

namespace modvar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Collects a max and remembers whether every contribution stayed below tol.
struct MaxCheck {
    double worst = 0.0;
    double tol;
    explicit MaxCheck(double t) : tol(t) {}
    void add(double v) { worst = std::max(worst, v); }
    bool pass() const { return worst < tol; }
};

bool verdict_named(const ExperimentResult& r, const std::string& name,
                   const Verdict** out = nullptr) {
    for (const auto& v : r.verdicts)
        if (v.name == name) {
            if (out) *out = &v;
            return v.pass;
        }
    return false;
}

double scalar_or(const ExperimentResult& r, const std::string& name, double fb) {
    const auto it = r.scalars.find(name);
    return it == r.scalars.end() ? fb : it->second;
}

// The standard interference stage: compact lumps one unit wide separated by
// eight units on a grid that keeps both windows and their images resolvable.
struct Stage {
    Grid grid{4096, 64.0};
    LumpSpec lump;
    double separation = 8.0;

    Stage() {
        lump.kind = LumpSpec::Kind::compact;
        lump.sigma = 1.0;
    }

    WaveFunction state(double alpha) const {
        return make_two_lump(grid, lump, separation, alpha);
    }
};

CriterionResult criterion_1(std::uint64_t seed) {
    CriterionResult c{1, "translation expectation equals e^{-i alpha} / 2", false, ""};
    const auto t0 = Clock::now();
    const Stage st;
    Philox4x32 rng(seed, 101);
    MaxCheck err(1e-10);
    for (int k = 0; k < 20; ++k) {
        const double alpha = rng.uniform(0.0, kTwoPi);
        const cd got = translation_expectation(st.state(alpha), st.separation);
        const cd want = std::polar(0.5, -alpha);
        err.add(std::abs(got - want));
    }
    const double elapsed = seconds_since(t0);
    c.pass = err.pass() && elapsed < 1.0;
    c.detail = "max error " + fmt(err.worst) + " (tol 1e-10), " + fmt(elapsed) +
               " s (limit 1 s)";
    return c;
}

CriterionResult criterion_2(std::uint64_t seed) {
    CriterionResult c{2, "moment deltas vanish before overlap; barrier control breaks them",
                      false, ""};
    Theorem1Config cfg;  // grid, times, and barrier pin the published run
    Philox4x32 rng(seed, 102);
    cfg.alphas.clear();
    for (int k = 0; k < 4; ++k) cfg.alphas.push_back(rng.uniform(0.0, kTwoPi));
    const ExperimentResult r = run_theorem1_suite(cfg, seed);
    const Verdict *pre_f = nullptr, *pre_b = nullptr, *post = nullptr;
    const bool ok = verdict_named(r, "free_pre_overlap_delta", &pre_f) &
                    verdict_named(r, "barrier_pre_overlap_delta", &pre_b) &
                    verdict_named(r, "barrier_post_overlap_delta", &post);
    c.pass = ok;
    std::ostringstream os;
    if (pre_f && pre_b && post)
        os << "pre-overlap deltas " << fmt(pre_f->value) << " / " << fmt(pre_b->value)
           << " (tol 1e-8); barrier post-overlap delta " << fmt(post->value)
           << " (must exceed 1e-4)";
    else
        os << "missing verdicts";
    c.detail = os.str();
    return c;
}

CriterionResult criterion_3(std::uint64_t seed) {
    CriterionResult c{3, "parity expectation is cos(alpha); single lump has <P> = 0, spread 1",
                      false, ""};
    const Stage st;
    Philox4x32 rng(seed, 103);
    MaxCheck err(1e-10);
    for (int k = 0; k < 20; ++k) {
        const double alpha = rng.uniform(0.0, kTwoPi);
        err.add(std::abs(parity_expectation(st.state(alpha)) - cd(std::cos(alpha), 0)));
    }
    LumpSpec right = st.lump;
    right.center = -st.separation / 2;
    const WaveFunction psi_r = make_lump(st.grid, right);
    const double mean_dev = std::abs(parity_expectation(psi_r));
    const double spread_dev = std::abs(parity_spread(psi_r) - 1.0);
    c.pass = err.pass() && mean_dev < 1e-14 && spread_dev < 1e-14;
    c.detail = "cos(alpha) error " + fmt(err.worst) + " (tol 1e-10); lump <P> " +
               fmt(mean_dev) + ", spread dev " + fmt(spread_dev) + " (tol 1e-14)";
    return c;
}

CriterionResult criterion_4(std::uint64_t) {
    CriterionResult c{4, "modular momentum of a narrow state is flat to order 8", false, ""};
    const Grid grid(4096, 64.0);
    LumpSpec lump;
    lump.kind = LumpSpec::Kind::compact;
    lump.sigma = 0.3;
    lump.center = 0.25;
    const WaveFunction psi = make_lump(grid, lump);
    const CircularDensity dist = modular_momentum_distribution(psi, 1.0);
    const FlatnessReport rep = fourier_flatness(dist, 8, 1e-10);

    CircularDensity synth;
    synth.period = dist.period;
    synth.values.resize(dist.values.size());
    for (size_t b = 0; b < synth.values.size(); ++b)
        synth.values[b] = (1.0 + std::cos(kTwoPi * static_cast<double>(b) /
                                          static_cast<double>(synth.values.size()))) /
                          synth.period;
    const FlatnessReport bad = fourier_flatness(synth, 8, 1e-10);

    c.pass = rep.flat && rep.max_abs < 1e-10 && !bad.flat;
    c.detail = "max |a_n| " + fmt(rep.max_abs) +
               " (tol 1e-10); synthetic non-flat max |a_n| " + fmt(bad.max_abs) +
               " correctly rejected";
    return c;
}

CriterionResult criterion_5(std::uint64_t) {
    CriterionResult c{5, "equation of motion: Richardson ratio near 4; periodic potential inert",
                      false, ""};
    // Richardson needs dt large enough for the dt^2 term to dominate, which
    // in turn needs a coarse momentum window: a dedicated small grid whose
    // kinetic phase stays inside the split-step guard at dt = 2e-3.
    const Grid rich_grid(256, 64.0);
    LumpSpec rich_lump;
    rich_lump.kind = LumpSpec::Kind::gaussian;
    rich_lump.sigma = 0.32;
    const double sep = 8.0;
    const WaveFunction rich_psi = make_two_lump(rich_grid, rich_lump, sep, 0.7);
    const PotentialSpec closed =
        PotentialSpec::barrier(rich_grid, sep / 2, 1.0, 3.0, "closed slit");
    const EomResidual coarse = eom_residual(rich_psi, closed, 1.0, sep, 2e-3);
    const EomResidual fine = eom_residual(rich_psi, closed, 1.0, sep, 1e-3);
    const double ratio = coarse.residual / fine.residual;

    // The inertness check keeps the fully resolved stage; its fine momentum
    // window forces a small dt (kinetic phase 0.4 < 0.5 at 2e-5).
    const Stage st;
    const WaveFunction psi = st.state(0.7);
    const PotentialSpec comb = PotentialSpec::periodic_comb(st.grid, st.separation, 3.0);
    const EomResidual inert = eom_residual(psi, comb, 1.0, st.separation, 2e-5);
    const double drift = std::abs(inert.numeric_derivative);

    c.pass = std::abs(ratio - 4.0) < 0.5 && drift < 1e-8 &&
             std::abs(inert.analytic_derivative) < 1e-12;
    c.detail = "ratio " + fmt(ratio) + " (4 +- 0.5); periodic-potential derivative " +
               fmt(drift) + " (tol 1e-8)";
    return c;
}

CriterionResult criterion_6(std::uint64_t seed) {
    CriterionResult c{6, "open slits: pointer shift is exactly lambda, Monte Carlo agrees",
                      false, ""};
    GedankenConfig cfg;
    cfg.monte_carlo = true;
    cfg.n_runs = 10000;
    const ExperimentResult r = run_gedanken(cfg, seed);
    const Verdict *shift = nullptr, *mc = nullptr;
    const bool ok = verdict_named(r, "open_shift_dev", &shift) &
                    verdict_named(r, "open_mc_shift_3se", &mc);
    c.pass = ok;
    if (shift && mc)
        c.detail = "shift error " + fmt(shift->value) + " (tol 1e-12); MC dev " +
                   fmt(mc->value) + " vs 3 SE " + fmt(mc->tolerance);
    return c;
}

CriterionResult criterion_7(std::uint64_t seed) {
    CriterionResult c{7,
                      "closed slit: zero shift, binomial pointer mixture, rare detections",
                      false, ""};
    GedankenConfig cfg;
    cfg.slit_open = false;
    const ExperimentResult base = run_gedanken(cfg, seed);
    const Verdict *shift = nullptr, *mix = nullptr;
    bool ok = verdict_named(base, "closed_shift_dev", &shift) &
              verdict_named(base, "closed_binomial_linf", &mix);

    double worst_rate = 0.0;
    for (int n : {10, 100, 1000}) {
        GedankenConfig mc = cfg;
        mc.n_particles = n;
        mc.monte_carlo = true;
        mc.n_runs = 4000;
        const ExperimentResult r = run_gedanken(mc, seed + n);
        ok &= verdict_named(r, "mc_detections_per_run");
        worst_rate = std::max(worst_rate, scalar_or(r, "mc_mean_detections", 1e9));
    }
    c.pass = ok;
    if (shift && mix)
        c.detail = "shift " + fmt(shift->value) + " (tol 1e-12); mixture L_inf " +
                   fmt(mix->value) + " (tol 1e-10); worst detections/run " +
                   fmt(worst_rate) + " (bound 0.3 for every N)";
    return c;
}

CriterionResult criterion_8(std::uint64_t seed) {
    CriterionResult c{8, "collapse rate matches the disturbance formula; total scales as 1/N",
                      false, ""};
    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    Vector in(2);
    in << 0, 1;
    const Meter meter = default_meter();

    bool ok = true;
    std::ostringstream os;
    for (double lambda : {0.05, 0.1, 0.2}) {
        const DisturbanceReport want = disturbance_probability(swap, in, lambda, meter);
        const McRate got = mc_disturbance_rate(swap, in, lambda, meter, 20000,
                                               seed + std::lround(lambda * 1000));
        const double dev = std::abs(got.rate - want.exact_value);
        ok &= dev < 3.0 * got.se;
        os << " dev(" << lambda << ")=" << fmt(dev) << "<=" << fmt(3.0 * got.se);
    }

    // Total disturbance across one collective run falls off as 1/N.
    Vector fin(2);
    fin << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    std::vector<double> lx, ly;
    for (int n : {4, 16, 64, 256}) {
        PrePostEnsemble ens{in, fin, 0.2, n, seed};
        const WeakOutcome wo = collective_couple(swap, ens, meter);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(wo.total_disturbance));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(lx.size());
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    ok &= std::abs(slope + 1.0) < 0.1;

    c.pass = ok;
    c.detail = "rate devs" + os.str() + "; disturbance exponent " + fmt(slope) +
               " (target -1 +- 0.1)";
    return c;
}

CriterionResult criterion_9(std::uint64_t seed) {
    CriterionResult c{9, "weak values over a complete final basis average to <A>", false, ""};
    MaxCheck err(1e-12);
    for (int trial = 0; trial < 100; ++trial) {
        Philox4x32 rng(seed, 900 + static_cast<std::uint64_t>(trial));
        const int dim = 2 + trial % 7;
        Matrix a(dim, dim), b(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                a(i, j) = cd(rng.normal(), rng.normal());
                b(i, j) = cd(rng.normal(), rng.normal());
            }
        a = ((a + a.adjoint()) / 2).eval();
        b = ((b + b.adjoint()) / 2).eval();
        Vector in(dim);
        for (int i = 0; i < dim; ++i) in(i) = cd(rng.normal(), rng.normal());
        in.normalize();
        Eigen::SelfAdjointEigenSolver<Matrix> es(b);
        const WeakSumCheck chk = complete_weak_sum(a, in, es.eigenvectors());
        err.add(chk.residual);
    }
    c.pass = err.pass();
    c.detail = "max residual " + fmt(err.worst) + " over 100 random systems (tol 1e-12)";
    return c;
}

CriterionResult criterion_10(std::uint64_t seed) {
    CriterionResult c{10, "interferometer: bright exit, weak path counts, blocked half-half",
                      false, ""};
    MachZehnderConfig open_cfg;
    open_cfg.monte_carlo = true;
    MachZehnderConfig blocked_cfg = open_cfg;
    blocked_cfg.l4_blocked = true;

    const ExperimentResult open_r = run_mach_zehnder(open_cfg, seed);
    const ExperimentResult blocked_r = run_mach_zehnder(blocked_cfg, seed + 1);

    bool ok = true;
    for (const char* name : {"exit_r4_dev", "weak_n_l2_dev", "weak_n_r2_dev",
                             "plate_readout_tilt_l2_dev", "plate_readout_tilt_r2_dev",
                             "mc_plate_tilt_l2_3se", "mc_plate_tilt_r2_3se"}) {
        ok &= verdict_named(open_r, name);
        ok &= verdict_named(blocked_r, name);
    }
    c.pass = ok;
    c.detail = "open counts (" + fmt(scalar_or(open_r, "weak_n_l2_re", -1)) + ", " +
               fmt(scalar_or(open_r, "weak_n_r2_re", -1)) + "); blocked (" +
               fmt(scalar_or(blocked_r, "weak_n_l2_re", -1)) + ", " +
               fmt(scalar_or(blocked_r, "weak_n_r2_re", -1)) +
               "); targets fixed by the weak-value engine before comparison";
    return c;
}

CriterionResult criterion_11(std::uint64_t seed) {
    CriterionResult c{11, "Z(N) bases: orthonormal, shift eigenvalues, equal weights",
                      false, ""};
    ZnConfig cfg;
    const ExperimentResult r = run_zn(cfg, seed);
    bool ok = true;
    double worst = 0.0;
    for (const auto& v : r.verdicts) {
        ok &= v.pass;
        worst = std::max(worst, v.value);
    }
    c.pass = ok;
    c.detail = "worst residual " + fmt(worst) + " over N in {2,3,5,8} (tol 1e-12)";
    return c;
}

CriterionResult criterion_12(std::uint64_t seed, Clock::time_point t0) {
    CriterionResult c{12, "ellipse transfers conserve; flux shifts fringes; suite is fast",
                      false, ""};
    ConservationConfig cons;
    const ExperimentResult ce = run_conservation_suite(cons, seed);
    bool ok = verdict_named(ce, "ellipse_residual") && verdict_named(ce, "sweep_closure");

    double worst_shift = 0.0;
    for (double flux : {0.25, 0.5}) {
        GratingConfig g;
        g.flux_ratio = flux;
        const ExperimentResult r = run_grating_flux(g, seed);
        const Verdict* v = nullptr;
        ok &= verdict_named(r, "fringe_shift_dev", &v);
        if (v) worst_shift = std::max(worst_shift, v->value);
    }
    const double elapsed = seconds_since(t0);
    ok &= elapsed < 120.0;
    c.pass = ok;
    c.detail = "ellipse residual " + fmt(scalar_or(ce, "ellipse_max_residual", 1)) +
               " (tol 1e-12); fringe dev " + fmt(worst_shift) +
               " (tol 1e-6); total runtime " + fmt(elapsed) + " s (limit 120 s)";
    return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed) {
    const auto t0 = Clock::now();
    std::vector<std::function<CriterionResult()>> checks = {
        [&] { return criterion_1(seed); },  [&] { return criterion_2(seed); },
        [&] { return criterion_3(seed); },  [&] { return criterion_4(seed); },
        [&] { return criterion_5(seed); },  [&] { return criterion_6(seed); },
        [&] { return criterion_7(seed); },  [&] { return criterion_8(seed); },
        [&] { return criterion_9(seed); },  [&] { return criterion_10(seed); },
        [&] { return criterion_11(seed); }, [&] { return criterion_12(seed, t0); },
    };
    std::vector<CriterionResult> out;
    out.reserve(checks.size());
    for (size_t i = 0; i < checks.size(); ++i) {
        try {
            out.push_back(checks[i]());
        } catch (const std::exception& e) {
            CriterionResult c;
            c.index = static_cast<int>(i) + 1;
            c.title = "criterion threw";
            c.pass = false;
            c.detail = e.what();
            out.push_back(c);
        }
    }
    return out;
}

int report_acceptance(const std::vector<CriterionResult>& results) {
    int failures = 0;
    for (const auto& c : results) {
        if (!c.pass) ++failures;
        std::printf("[%s] %2d: %s (%s)\n", c.pass ? "PASS" : "FAIL", c.index,
                    c.title.c_str(), c.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n",
                static_cast<int>(results.size()) - failures, results.size());
    return failures;
}

}  // namespace modvar
