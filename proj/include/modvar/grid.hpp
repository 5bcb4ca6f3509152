#pragma once

#include <cmath>
#include <string>

#include "modvar/errors.hpp"

namespace modvar {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kSqrtTwoPi = 2.5066282746310005024157652848110;

// Uniform periodic position lattice x_i = (i - n/2) dx, i = 0..n-1, of total
// length L = n dx, together with its discrete-Fourier momentum lattice
// p_j = (2 pi / L) m_j where m_j = j for j < n/2 and j - n otherwise.
// dx dp n = 2 pi, so position/momentum transforms are exactly unitary.
class Grid {
public:
    Grid(int n_points, double length) : n_(n_points), length_(length) {
        if (n_points < 2 || (n_points & 1) != 0)
            throw GridError("grid size must be even and >= 2, got " +
                            std::to_string(n_points));
        if (!(length > 0.0))
            throw GridError("grid length must be positive");
    }

    int n_points() const { return n_; }
    double length() const { return length_; }
    double dx() const { return length_ / n_; }
    double dp() const { return kTwoPi / length_; }
    double p_max() const { return dp() * (n_ / 2); }

    double x(int i) const { return (i - n_ / 2) * dx(); }

    // Signed FFT bin index: 0, 1, ..., n/2-1, -n/2, ..., -1.
    int momentum_index(int j) const { return j < n_ / 2 ? j : j - n_; }
    double p(int j) const { return dp() * momentum_index(j); }

    bool operator==(const Grid& o) const {
        return n_ == o.n_ && length_ == o.length_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    // Displacement as an exact lattice step count. Throws GridError when the
    // displacement is not an integer multiple of dx (within 1e-9 dx).
    int site_shift(double displacement, const char* what) const {
        const double steps = displacement / dx();
        const double rounded = std::nearbyint(steps);
        if (std::abs(steps - rounded) > 1e-9)
            throw GridError(std::string(what) + " = " +
                            std::to_string(displacement) +
                            " is not an integer multiple of dx = " +
                            std::to_string(dx()));
        return static_cast<int>(rounded);
    }

private:
    int n_;
    double length_;
};

}  // namespace modvar
