#include "modvar/fourier.hpp"

#include <fftw3.h>

#include <mutex>
#include <unordered_map>

namespace modvar {
namespace {

std::mutex planner_mutex;  // FFTW's planner is not thread-safe

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<cd> buf;
};

// Per-thread plan cache keyed by transform size. Heap-allocated on purpose:
// destroying plans at thread exit would race the planner lock order, and the
// handful of distinct sizes per process makes the leak bounded and harmless.
PlanPair& plans_for(int n) {
    thread_local auto* cache = new std::unordered_map<int, PlanPair>();
    PlanPair& slot = (*cache)[n];
    if (!slot.fwd) {
        slot.buf.resize(n);
        auto* p = reinterpret_cast<fftw_complex*>(slot.buf.data());
        std::lock_guard<std::mutex> lock(planner_mutex);
        slot.fwd = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        slot.bwd = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    return slot;
}

}  // namespace

// With x_i = (i - n/2) dx and p_j = dp m_j, exp(-i p_j x_i) =
// exp(-2 pi i m_j i / n) * exp(i pi m_j), so the continuum transform is a plain
// DFT followed by the alternating sign (-1)^j on the output bins (n is even).
std::vector<cd> to_momentum(const Grid& grid, const std::vector<cd>& position_amps) {
    const int n = grid.n_points();
    if (static_cast<int>(position_amps.size()) != n)
        throw GridError("amplitude count does not match grid");
    PlanPair& pp = plans_for(n);
    std::copy(position_amps.begin(), position_amps.end(), pp.buf.begin());
    fftw_execute(pp.fwd);
    std::vector<cd> out(n);
    const double scale = grid.dx() / kSqrtTwoPi;
    for (int j = 0; j < n; ++j)
        out[j] = pp.buf[j] * ((j & 1) ? -scale : scale);
    return out;
}

std::vector<cd> to_position(const Grid& grid, const std::vector<cd>& momentum_amps) {
    const int n = grid.n_points();
    if (static_cast<int>(momentum_amps.size()) != n)
        throw GridError("amplitude count does not match grid");
    PlanPair& pp = plans_for(n);
    for (int j = 0; j < n; ++j)
        pp.buf[j] = (j & 1) ? -momentum_amps[j] : momentum_amps[j];
    fftw_execute(pp.bwd);
    std::vector<cd> out(n);
    const double scale = grid.dp() / kSqrtTwoPi;
    for (int i = 0; i < n; ++i) out[i] = pp.buf[i] * scale;
    return out;
}

}  // namespace modvar
