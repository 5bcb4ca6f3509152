#pragma once

#include <complex>
#include <vector>

#include "modvar/fourier.hpp"
#include "modvar/grid.hpp"

namespace modvar {

// A normalized state on a Grid, stored as position amplitudes.
class WaveFunction {
public:
    WaveFunction(Grid grid, std::vector<cd> amps);

    const Grid& grid() const { return grid_; }
    const std::vector<cd>& amps() const { return amps_; }
    std::vector<cd>& amps() { return amps_; }

    double norm() const;           // sqrt(sum |psi|^2 dx)
    WaveFunction& normalize();     // throws GridError on (near-)zero norm

    std::vector<double> position_density() const;   // |psi(x_i)|^2
    std::vector<cd> momentum_amps() const;          // FFT bin order
    std::vector<double> momentum_density() const;   // |psi~(p_j)|^2

private:
    Grid grid_;
    std::vector<cd> amps_;
};

// <a|b> = sum conj(a_i) b_i dx. Throws GridError on mismatched grids.
cd inner(const WaveFunction& a, const WaveFunction& b);

// sum |a_i| |b_i| dx: zero exactly iff the supports are disjoint on the lattice.
double overlap_magnitude(const WaveFunction& a, const WaveFunction& b);

}  // namespace modvar
