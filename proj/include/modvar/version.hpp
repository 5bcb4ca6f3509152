#pragma once

#include <cstdint>

namespace modvar {

inline constexpr const char* kVersion = "1.0.0";

// Seed used whenever the caller does not supply one; documented so that
// default runs are reproducible across machines.
inline constexpr std::uint64_t kDefaultSeed = 20260825ULL;

}  // namespace modvar
