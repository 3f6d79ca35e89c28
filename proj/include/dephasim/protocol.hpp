#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "dephasim/params.hpp"
#include "dephasim/spectrum.hpp"

namespace dephasim::protocol {

// One weighted phase-flip pattern over k Bell pairs: bit i set means pair i
// carries a phase flip, occurring with probability (1-p)^(k-j) p^j.
struct ErrorPattern {
    std::uint32_t flags = 0;
    int weight = 0;
    double probability = 0.0;
};

// A conditional post-measurement branch: probability, normalized spectrum
// over the surviving pairs, and the fidelity of one surviving pair with
// the phi+ Bell state. Zero-probability branches carry an empty spectrum
// and fidelity 0.
struct BranchOutcome {
    BranchTag tag;
    double probability = 0.0;
    Spectrum spectrum;
    double reduced_pair_fidelity = 0.0;
};

struct Round1Outcomes {
    BranchOutcome success;
    BranchOutcome failure;
};

struct Round2Outcomes {
    BranchOutcome ss;  // succeeded both rounds
    BranchOutcome sf;  // succeeded round 1, failed round 2 (pooled)
    BranchOutcome fs;
    BranchOutcome ff;

    const BranchOutcome& get(const BranchTag& tag) const;
};

// Exhaustive round 1 over all 2^m patterns. Success collects the even
// parities; the measured control pair is the last one. Requires m <= 20.
Round1Outcomes enumerate_round1(const DephasingParams& params);

// Exhaustive round 2 over all 2^(m*m) patterns (m <= 4). Rows are the m
// first-round blocks, columns the pair slots; the last copy is the round-2
// control. Round-1 conditioning keeps only homogeneous groups (all rows
// even, or all rows odd); reported probabilities are conditional on that
// group. Failure branches pool every non-success measurement outcome.
Round2Outcomes enumerate_round2(const DephasingParams& params);

// The all-success lineage through `rounds` recursive purification rounds.
struct LineageRound {
    int round = 0;
    double success_probability = 0.0;  // of this round, given the lineage so far
    double failure_probability = 0.0;
    double lineage_probability = 0.0;  // cumulative from round 1
    double fidelity = 0.0;             // of a surviving pair after this round
};

// Exhaustive multi-round enumeration over all 2^(m^rounds) patterns;
// requires m^rounds <= 24. Round r regroups slot tuples across the m
// copies of the round-(r-1) blocks, always measuring the last copy.
std::vector<LineageRound> enumerate_rounds(const DephasingParams& params, int rounds);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct McLineageRound {
    int round = 0;
    Estimate success_probability;  // conditional on the lineage so far
    Estimate fidelity;
    std::int64_t accepted = 0;  // samples surviving through this round
};

struct McRounds {
    std::vector<McLineageRound> rounds;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// Seeded Monte Carlo version of enumerate_rounds for block sizes beyond
// the exhaustive guard. Deterministic for a fixed (seed, samples).
McRounds monte_carlo_rounds(const DephasingParams& params, int rounds, std::int64_t samples,
                            std::uint64_t seed);

struct McRound2 {
    Estimate p_homogeneous_success;  // all m blocks succeed round 1
    Estimate p_homogeneous_failure;
    Estimate p_s1s2;  // conditional round-2 success probabilities
    Estimate p_f1s2;
    Estimate fidelity_s1s2;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

McRound2 monte_carlo_round2(const DephasingParams& params, std::int64_t samples,
                            std::uint64_t seed);

// Stable JSON record for a branch: {tag, probability, fidelity, pair_count,
// spectrum: [{j[,j2], value, multiplicity}]}.
nlohmann::json branch_report(const BranchOutcome& outcome);

}  // namespace dephasim::protocol
