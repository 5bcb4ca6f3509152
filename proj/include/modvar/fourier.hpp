#pragma once

#include <complex>
#include <vector>

#include "modvar/grid.hpp"

namespace modvar {

using cd = std::complex<double>;

// Continuum-normalized transform pair on the grid lattice:
//   psi~(p_j) = dx / sqrt(2 pi) * sum_i psi(x_i) exp(-i p_j x_i)
//   psi(x_i)  = dp / sqrt(2 pi) * sum_j psi~(p_j) exp(+i p_j x_i)
// Output of to_momentum is in FFT bin order (Grid::p(j) gives the momentum of
// bin j). The pair is exactly unitary: sum |psi|^2 dx == sum |psi~|^2 dp.
std::vector<cd> to_momentum(const Grid& grid, const std::vector<cd>& position_amps);
std::vector<cd> to_position(const Grid& grid, const std::vector<cd>& momentum_amps);

}  // namespace modvar
