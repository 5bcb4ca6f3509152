#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace modvar {

struct CriterionResult {
    int index = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // measured values and the tolerances they met
};

// Runs the twelve acceptance checks. Deterministic for a given seed.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed);

// Prints one line per criterion ("[PASS] 3: ..." / "[FAIL] ..."); returns the
// number of failures.
int report_acceptance(const std::vector<CriterionResult>& results);

}  // namespace modvar
