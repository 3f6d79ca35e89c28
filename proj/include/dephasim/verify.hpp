#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dephasim::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // failure description, empty when passed
    double elapsed_ms = 0.0;
};

struct Options {
    std::uint64_t mc_seed = 987654321;  // Monte Carlo consistency check seed
    std::int64_t mc_samples = 1000000;
};

// Every cross-check from the library invariants, one named result per
// check. Exceptions inside a check are reported as failures.
std::vector<CheckResult> run_all_checks(const Options& options = {});

}  // namespace dephasim::verify
