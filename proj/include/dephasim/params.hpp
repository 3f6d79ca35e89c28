#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace dephasim {

// Channel/protocol parameters: dephasing probability p in [0, 1/2]
// (p = 1/2 is complete dephasing), m >= 2 Bell pairs per block,
// n >= 1 purification rounds.
struct DephasingParams {
    double p = 0.0;
    int m = 2;
    int n = 1;

    void validate() const {
        if (!(p >= 0.0 && p <= 0.5))
            throw std::domain_error("dephasing probability must lie in [0, 1/2], got " +
                                    std::to_string(p));
        if (m < 2)
            throw std::domain_error("block size m must be >= 2, got " + std::to_string(m));
        if (n < 1)
            throw std::domain_error("round count n must be >= 1, got " + std::to_string(n));
    }
};

enum class StepResult { success, failure };

// Identifies one conditional branch of the protocol: a round-1 outcome,
// optionally refined by a round-2 outcome. Exactly one of
// {s1, f1, s1s2, s1f2, f1s2, f1f2}.
struct BranchTag {
    StepResult round1 = StepResult::success;
    std::optional<StepResult> round2;

    static BranchTag s1() { return {StepResult::success, std::nullopt}; }
    static BranchTag f1() { return {StepResult::failure, std::nullopt}; }
    static BranchTag s1s2() { return {StepResult::success, StepResult::success}; }
    static BranchTag s1f2() { return {StepResult::success, StepResult::failure}; }
    static BranchTag f1s2() { return {StepResult::failure, StepResult::success}; }
    static BranchTag f1f2() { return {StepResult::failure, StepResult::failure}; }

    bool is_round1_only() const { return !round2.has_value(); }

    std::string name() const {
        std::string s = round1 == StepResult::success ? "s1" : "f1";
        if (round2)
            s += *round2 == StepResult::success ? "s2" : "f2";
        return s;
    }

    friend bool operator==(const BranchTag& a, const BranchTag& b) {
        return a.round1 == b.round1 && a.round2 == b.round2;
    }
};

}  // namespace dephasim
