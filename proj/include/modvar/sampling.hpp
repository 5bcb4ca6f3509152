#pragma once

#include <algorithm>
#include <vector>

#include "modvar/grid.hpp"

namespace modvar {

// Inverse-CDF sampler over a density tabulated on uniform bins. The map from
// the uniform deviate to the sample is deterministic and piecewise linear, so
// draws are bit-reproducible for a given input.
class GridSampler {
public:
    GridSampler(std::vector<double> axis, const std::vector<double>& density)
        : axis_(std::move(axis)), cdf_(axis_.size()) {
        if (axis_.size() != density.size() || axis_.empty())
            throw GridError("sampler axis/density size mismatch");
        step_ = axis_.size() > 1 ? axis_[1] - axis_[0] : 1.0;
        double acc = 0.0;
        for (size_t i = 0; i < density.size(); ++i) {
            acc += std::max(0.0, density[i]) * step_;
            cdf_[i] = acc;
        }
        total_ = acc;
        if (!(total_ > 0.0)) throw GridError("sampler density has zero mass");
    }

    GridSampler(const Grid& grid, const std::vector<double>& density)
        : GridSampler(
              [&] {
                  std::vector<double> ax(grid.n_points());
                  for (int i = 0; i < grid.n_points(); ++i) ax[i] = grid.x(i);
                  return ax;
              }(),
              density) {}

    // u in [0, 1).
    double sample(double u) const {
        const double target = u * total_;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        const size_t i = std::min<size_t>(it - cdf_.begin(), cdf_.size() - 1);
        const double lo = i == 0 ? 0.0 : cdf_[i - 1];
        const double mass = cdf_[i] - lo;
        const double frac = mass > 0.0 ? (target - lo) / mass : 0.5;
        return axis_[i] - 0.5 * step_ + frac * step_;
    }

    double total_mass() const { return total_; }

private:
    std::vector<double> axis_;
    std::vector<double> cdf_;
    double step_ = 1.0;
    double total_ = 0.0;
};

}  // namespace modvar
