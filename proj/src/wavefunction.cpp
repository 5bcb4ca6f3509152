#include "modvar/wavefunction.hpp"

#include <cmath>

namespace modvar {

WaveFunction::WaveFunction(Grid grid, std::vector<cd> amps)
    : grid_(grid), amps_(std::move(amps)) {
    if (static_cast<int>(amps_.size()) != grid_.n_points())
        throw GridError("amplitude count does not match grid");
}

double WaveFunction::norm() const {
    double s = 0.0;
    for (const cd& a : amps_) s += std::norm(a);
    return std::sqrt(s * grid_.dx());
}

WaveFunction& WaveFunction::normalize() {
    const double n = norm();
    if (n < 1e-150) throw GridError("cannot normalize a zero state");
    const double inv = 1.0 / n;
    for (cd& a : amps_) a *= inv;
    return *this;
}

std::vector<double> WaveFunction::position_density() const {
    std::vector<double> d(amps_.size());
    for (size_t i = 0; i < amps_.size(); ++i) d[i] = std::norm(amps_[i]);
    return d;
}

std::vector<cd> WaveFunction::momentum_amps() const {
    return to_momentum(grid_, amps_);
}

std::vector<double> WaveFunction::momentum_density() const {
    const std::vector<cd> m = momentum_amps();
    std::vector<double> d(m.size());
    for (size_t j = 0; j < m.size(); ++j) d[j] = std::norm(m[j]);
    return d;
}

cd inner(const WaveFunction& a, const WaveFunction& b) {
    if (a.grid() != b.grid()) throw GridError("inner product across different grids");
    cd s = 0.0;
    const auto& av = a.amps();
    const auto& bv = b.amps();
    for (size_t i = 0; i < av.size(); ++i) s += std::conj(av[i]) * bv[i];
    return s * a.grid().dx();
}

double overlap_magnitude(const WaveFunction& a, const WaveFunction& b) {
    if (a.grid() != b.grid()) throw GridError("overlap across different grids");
    double s = 0.0;
    const auto& av = a.amps();
    const auto& bv = b.amps();
    for (size_t i = 0; i < av.size(); ++i) s += std::abs(av[i]) * std::abs(bv[i]);
    return s * a.grid().dx();
}

}  // namespace modvar
