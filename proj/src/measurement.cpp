#include "modvar/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "modvar/sampling.hpp"
#include "modvar/wavespace.hpp"

namespace modvar {
namespace {

void check_hermitian(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw SpectrumError("operator must be a square matrix");
    const double scale = 1.0 + A.cwiseAbs().maxCoeff();
    const double dev = (A - A.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * scale)
        throw SpectrumError("operator deviates from Hermitian by " +
                            std::to_string(dev));
}

Vector unit(const Vector& v, const char* what) {
    const double n = v.norm();
    if (n < 1e-150) throw SpectrumError(std::string(what) + " state has zero norm");
    return v / n;
}

struct Spectral {
    Eigen::VectorXd values;
    Matrix vectors;
};

Spectral spectral(const Matrix& A) {
    check_hermitian(A);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
        throw SpectrumError("eigendecomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// |<in|e^{-i lambda q A}|in>|^2 given the eigenbasis weights of |in>.
double survival_prob(const Eigen::VectorXd& values, const Vector& iv,
                     double lambda, double q) {
    cd surv = 0.0;
    for (int k = 0; k < values.size(); ++k)
        surv += std::norm(iv(k)) * std::polar(1.0, -lambda * q * values(k));
    return std::norm(surv);
}

}  // namespace

Meter Meter::gaussian(const Grid& grid, double sigma_q) {
    if (!(sigma_q > 0.0)) throw GridError("meter sigma_q must be positive");
    std::vector<cd> amps(grid.n_points());
    for (int i = 0; i < grid.n_points(); ++i) {
        const double q = grid.x(i);
        amps[i] = std::exp(-q * q / (4.0 * sigma_q * sigma_q));
    }
    WaveFunction state(grid, std::move(amps));
    state.normalize();
    return {std::move(state), sigma_q};
}

Meter default_meter() { return Meter::gaussian(Grid(512, 40.0), 0.5); }

double mean_q(const Meter& m) { return expect_xm_pn(m.state, 1, 0).real(); }

double var_q(const Meter& m) {
    const double mu = mean_q(m);
    return expect_xm_pn(m.state, 2, 0).real() - mu * mu;
}

// The pointer convention flips the sign of the momentum axis relative to the
// position-space transform used for system states (see Meter docs), hence the
// negations here.
double mean_p(const Meter& m) { return -expect_xm_pn(m.state, 0, 1).real(); }

double var_p(const Meter& m) {
    const double mu = expect_xm_pn(m.state, 0, 1).real();
    return expect_xm_pn(m.state, 0, 2).real() - mu * mu;
}

std::pair<std::vector<double>, std::vector<double>> p_readout(const Meter& m) {
    const Grid& g = m.state.grid();
    const int n = g.n_points();
    const std::vector<double> dens = m.state.momentum_density();
    std::vector<double> axis(n), sorted(n);
    for (int j = 0; j < n; ++j) {
        // Mirror the standard-transform bin at p onto the pointer axis at -p;
        // the grid's -n/2 bin has no mirror partner and stays at the edge.
        const int mi = g.momentum_index(j);
        const int k = mi == -n / 2 ? 0 : n / 2 - mi;
        axis[k] = mi == -n / 2 ? g.p(j) : -g.p(j);
        sorted[k] = dens[j];
    }
    return {std::move(axis), std::move(sorted)};
}

const Vector& FiniteDecomposition::require_perp() const {
    if (!perp) throw DegenerateError("state is an eigenstate; no orthogonal component");
    return *perp;
}

const WaveFunction& WaveDecomposition::require_perp() const {
    if (!perp) throw DegenerateError("state is an eigenstate; no orthogonal component");
    return *perp;
}

FiniteDecomposition theorem3_decompose(const Matrix& A, const Vector& state) {
    check_hermitian(A);
    const Vector s = unit(state, "input");
    const Vector as = A * s;
    const double mean = std::real(cd(s.dot(as)));
    const double second = as.squaredNorm();
    const double var = std::max(0.0, second - mean * mean);
    FiniteDecomposition out{{mean, std::sqrt(var)}, std::nullopt};
    const double scale = 1.0 + A.cwiseAbs().maxCoeff();
    if (out.stats.spread < 1e-14 * scale) {
        out.stats.spread = 0.0;
        return out;
    }
    Vector perp = (as - mean * s) / out.stats.spread;
    out.perp = perp / perp.norm();  // re-unitize against rounding
    return out;
}

WaveDecomposition theorem3_decompose(
    const std::function<WaveFunction(const WaveFunction&)>& op,
    const WaveFunction& state) {
    WaveFunction s = state;
    s.normalize();
    const WaveFunction as = op(s);
    const double mean = inner(s, as).real();
    const double second = inner(as, as).real();
    const double var = std::max(0.0, second - mean * mean);
    WaveDecomposition out{{mean, std::sqrt(var)}, std::nullopt};
    if (out.stats.spread < 1e-14 * (1.0 + std::abs(mean))) {
        out.stats.spread = 0.0;
        return out;
    }
    std::vector<cd> diff(s.amps().size());
    for (size_t i = 0; i < diff.size(); ++i)
        diff[i] = (as.amps()[i] - mean * s.amps()[i]) / out.stats.spread;
    WaveFunction perp(s.grid(), std::move(diff));
    perp.normalize();
    out.perp = std::move(perp);
    return out;
}

MeasurementOutcome ideal_measure(const Matrix& A, const Vector& state,
                                 Philox4x32& rng) {
    const Spectral es = spectral(A);
    const Vector s = unit(state, "input");
    const Matrix& V = es.vectors;
    const Vector overlaps = V.adjoint() * s;  // <v_k|s>

    const int d = static_cast<int>(es.values.size());
    const double group_tol = 1e-10 * (1.0 + es.values.cwiseAbs().maxCoeff());
    MeasurementOutcome out;
    std::vector<std::pair<int, int>> groups;  // [first, last) eigenindex ranges
    for (int k = 0; k < d;) {
        int e = k + 1;
        while (e < d && es.values(e) - es.values(k) <= group_tol) ++e;
        groups.emplace_back(k, e);
        double prob = 0.0, val = 0.0;
        for (int g = k; g < e; ++g) {
            prob += std::norm(overlaps(g));
            val += es.values(g);
        }
        out.distinct_values.push_back(val / (e - k));
        out.probabilities.push_back(prob);
        k = e;
    }

    const double u = rng.uniform();
    double acc = 0.0;
    size_t pick = out.probabilities.size() - 1;
    for (size_t gi = 0; gi < out.probabilities.size(); ++gi) {
        acc += out.probabilities[gi];
        if (u < acc) {
            pick = gi;
            break;
        }
    }
    out.eigenvalue = out.distinct_values[pick];
    Vector collapsed = Vector::Zero(d);
    for (int g = groups[pick].first; g < groups[pick].second; ++g)
        collapsed += V.col(g) * overlaps(g);
    const double cn = collapsed.norm();
    if (cn < 1e-150)
        throw SpectrumError("drew an outcome with vanishing probability");
    out.collapsed = collapsed / cn;
    return out;
}

MeasurementOutcome ideal_measure(const Matrix& A, const Vector& state,
                                 std::uint64_t seed) {
    Philox4x32 rng(seed);
    return ideal_measure(A, state, rng);
}

cd weak_value(const Matrix& A, const Vector& in, const Vector& fin) {
    check_hermitian(A);
    const Vector i = unit(in, "pre-selected");
    const Vector f = unit(fin, "post-selected");
    const cd den = f.dot(i);  // <fin|in>
    if (std::abs(den) < 1e-12)
        throw OrthogonalError("pre- and post-selected states are orthogonal");
    const cd num = f.dot(A * i);
    return num / den;
}

WeakSumCheck complete_weak_sum(const Matrix& A, const Vector& in,
                               const Matrix& final_basis) {
    check_hermitian(A);
    if (final_basis.rows() != in.size() || final_basis.cols() != in.size())
        throw SpectrumError("final basis must be square in the system dimension");
    const Vector i = unit(in, "pre-selected");
    cd sum = 0.0;
    for (int j = 0; j < final_basis.cols(); ++j) {
        const Vector f = final_basis.col(j);
        const cd o = f.dot(i);
        if (std::abs(o) < 1e-300) continue;  // zero weight, finite weak-value limit
        const double prob = std::norm(o);
        sum += prob * (f.dot(A * i) / o);
    }
    WeakSumCheck out;
    out.weighted_sum = sum;
    out.expectation = i.dot(A * i);
    out.residual = std::abs(sum - out.expectation);
    return out;
}

Meter conditional_meter(const std::function<cd(double)>& c_of_q, int n_particles,
                        const Meter& meter, double* log_prob_out) {
    if (n_particles < 1) throw SpectrumError("particle count must be >= 1");
    const Grid& g = meter.state.grid();
    const int n = g.n_points();
    std::vector<cd> c(n);
    double cmax = 0.0;
    for (int i = 0; i < n; ++i) {
        c[i] = c_of_q(g.x(i));
        cmax = std::max(cmax, std::abs(c[i]));
    }
    if (cmax <= 0.0)
        throw OrthogonalError("post-selection amplitude vanishes everywhere");

    // Rescale by the peak magnitude before exponentiation: (c/cmax)^N stays in
    // [0, 1] and the factored probability is recovered in log form.
    std::vector<cd> amps(n);
    for (int i = 0; i < n; ++i) {
        const double mag = std::abs(c[i]);
        const cd cn = mag == 0.0
                          ? cd(0.0)
                          : std::polar(std::pow(mag / cmax, n_particles),
                                       std::arg(c[i]) * n_particles);
        amps[i] = meter.state.amps()[i] * cn;
    }
    WaveFunction state(g, std::move(amps));
    const double raw = state.norm();
    if (raw < 1e-150)
        throw OrthogonalError("post-selection probability underflowed to zero");
    if (log_prob_out)
        *log_prob_out = 2.0 * (std::log(raw) + n_particles * std::log(cmax));
    state.normalize();
    return {std::move(state), meter.sigma_q};
}

namespace {

WeakOutcome couple_impl(const Matrix& A, const PrePostEnsemble& ensemble,
                        const Meter& meter, bool enforce_bound) {
    const Spectral es = spectral(A);
    if (ensemble.n_particles < 1)
        throw SpectrumError("ensemble particle count must be >= 1");
    if (enforce_bound && es.values.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
        throw NormBoundError(
            "collective coupling requires operator norm <= 1, got " +
            std::to_string(es.values.cwiseAbs().maxCoeff()));

    const Vector in = unit(ensemble.in, "pre-selected");
    const Vector fin = unit(ensemble.fin, "post-selected");
    const Vector fv = (es.vectors.adjoint() * fin).conjugate();  // <fin|v_k>
    const Vector iv = es.vectors.adjoint() * in;                 // <v_k|in>
    const int d = static_cast<int>(es.values.size());
    std::vector<cd> weights(d);
    cd fin_in = 0.0;
    for (int k = 0; k < d; ++k) {
        weights[k] = fv(k) * iv(k);
        fin_in += weights[k];
    }
    if (std::abs(fin_in) < 1e-12)
        throw OrthogonalError("pre- and post-selected states are orthogonal");

    const int N = ensemble.n_particles;
    const double theta = ensemble.lambda / N;
    const auto c_norm = [&](double q) {
        cd acc = 0.0;
        for (int k = 0; k < d; ++k)
            acc += weights[k] * std::polar(1.0, -theta * q * es.values(k));
        return acc / fin_in;
    };

    WeakOutcome out{meter, 0.0, fin_in, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
    double log_cond = 0.0;
    out.meter_final = conditional_meter(c_norm, N, meter, &log_cond);
    out.log_postselect_prob = log_cond + 2.0 * N * std::log(std::abs(fin_in));
    out.postselect_prob = std::min(1.0, std::exp(out.log_postselect_prob));
    out.weak_value = weak_value(A, in, fin);
    out.shift_estimate = mean_p(out.meter_final) - mean_p(meter);
    out.shift_se = 0.0;
    out.var_p_final = var_p(out.meter_final);

    const DisturbanceReport rep =
        disturbance_probability(A, in, ensemble.lambda / N, meter);
    out.disturbance_formula = rep.formula_value;
    out.disturbance_exact = rep.exact_value;
    out.total_disturbance = 1.0 - std::pow(1.0 - rep.exact_value, N);

    if (N == 1) {
        if (std::abs(ensemble.lambda) > 0.3)
            out.warnings.push_back("lambda above the weak-coupling regime");
    } else {
        if (std::abs(theta) > 0.3)
            out.warnings.push_back(
                "per-particle coupling lambda/N above the weak regime");
        if (ensemble.lambda * ensemble.lambda / N > 0.09)
            out.warnings.push_back(
                "accumulated disturbance lambda^2/N is large; collective readout "
                "unreliable");
    }
    return out;
}

}  // namespace

WeakOutcome weak_couple_single(const Matrix& A, const PrePostEnsemble& ensemble,
                               const Meter& meter) {
    PrePostEnsemble one = ensemble;
    one.n_particles = 1;
    return couple_impl(A, one, meter, false);
}

WeakOutcome weak_couple_single(const Matrix& A, const PrePostEnsemble& ensemble) {
    return weak_couple_single(A, ensemble, default_meter());
}

WeakOutcome collective_couple(const Matrix& A, const PrePostEnsemble& ensemble,
                              const Meter& meter) {
    return couple_impl(A, ensemble, meter, true);
}

WeakOutcome collective_couple(const Matrix& A, const PrePostEnsemble& ensemble) {
    return couple_impl(A, ensemble, default_meter(), true);
}

DisturbanceReport disturbance_probability(const Matrix& A, const Vector& in,
                                          double lambda, const Meter& meter) {
    const Spectral es = spectral(A);
    const Vector i = unit(in, "pre-selected");
    const Vector iv = es.vectors.adjoint() * i;
    const int d = static_cast<int>(es.values.size());

    const double q2 = expect_xm_pn(meter.state, 2, 0).real();
    double mean_a = 0.0, a2 = 0.0;
    for (int k = 0; k < d; ++k) {
        mean_a += std::norm(iv(k)) * es.values(k);
        a2 += std::norm(iv(k)) * es.values(k) * es.values(k);
    }
    const double var_a = std::max(0.0, a2 - mean_a * mean_a);

    DisturbanceReport rep;
    rep.formula_value =
        lambda * lambda * q2 * var_a / (1.0 + lambda * lambda * q2 * a2);

    const Grid& g = meter.state.grid();
    double stay = 0.0;
    for (int b = 0; b < g.n_points(); ++b)
        stay += std::norm(meter.state.amps()[b]) *
                survival_prob(es.values, iv, lambda, g.x(b));
    rep.exact_value = 1.0 - stay * g.dx();
    return rep;
}

McRate mc_disturbance_rate(const Matrix& A, const Vector& in, double lambda,
                           const Meter& meter, long n_trials,
                           std::uint64_t seed) {
    if (n_trials < 1) throw SpectrumError("trial count must be >= 1");
    const Spectral es = spectral(A);
    const Vector i = unit(in, "pre-selected");
    const Vector iv = es.vectors.adjoint() * i;

    const GridSampler sampler(meter.state.grid(), meter.state.position_density());

    long disturbed = 0;
    for (long t = 0; t < n_trials; ++t) {
        Philox4x32 rng(seed, static_cast<std::uint64_t>(t));
        const double q = sampler.sample(rng.uniform());
        if (rng.uniform() < 1.0 - survival_prob(es.values, iv, lambda, q))
            ++disturbed;
    }
    McRate out;
    out.n_trials = n_trials;
    out.rate = static_cast<double>(disturbed) / static_cast<double>(n_trials);
    out.se = std::sqrt(std::max(out.rate * (1.0 - out.rate),
                                1.0 / static_cast<double>(n_trials)) /
                       static_cast<double>(n_trials));
    return out;
}

}  // namespace modvar
