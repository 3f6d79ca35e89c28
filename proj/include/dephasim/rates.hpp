#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dephasim/params.hpp"
#include "dephasim/spectrum.hpp"

namespace dephasim::rates {

/// Von Neumann entropy in bits of a normalized Bell-diagonal spectrum.
/// Throws if the spectrum is not normalized.
double entropy_of_spectrum(const Spectrum& spectrum);

struct BranchLedgerEntry {
    BranchTag tag;
    // Weight of this branch in the round average: the branch probability
    // for round 1, the product of round-1 and conditional round-2
    // probabilities for round 2.
    double probability = 0.0;
    double entropy = 0.0;         // S(rho_AB); 0 for a branch that never occurs
    double alice_log2_dim = 0.0;  // S(rho_A) = (m-1)^round
    double rci = 0.0;             // alice_log2_dim - entropy
};

// Per-round rate accounting: every conditional branch, the average reverse
// coherent information per channel use, and the capacity bound chain
// ((m-1)/m)^round * C <= average <= C.
struct RoundLedger {
    int round = 1;
    double p = 0.0;
    int m = 2;
    std::vector<BranchLedgerEntry> branches;
    double average_rci = 0.0;
    double lower_bound = 0.0;
    double capacity = 0.0;
};

// Round-1 ledger from the closed-form spectra. Entropies are evaluated in
// log space, so any m >= 2 works (binomial weights never overflow).
RoundLedger rci_round1(const DephasingParams& params);

// Round-2 ledger from the closed-form spectra with exact multiplicity
// counts (m <= 8).
RoundLedger rci_round2(const DephasingParams& params);

/// Capacity bound chain for round n: (((m-1)/m)^n * C, C).
std::pair<double, double> rci_bound(const DephasingParams& params, int rounds);

// Side-by-side RCI of the reduced-state (alternative) protocol and the
// actual high-dimensional success branch after `round` rounds.
struct AlternativeComparison {
    int round = 1;
    double alternative_rci = 0.0;  // (m-1)^round * (1 - H2(p_round))
    double actual_rci = 0.0;       // (m-1)^round - S(success spectrum)
    double difference = 0.0;       // actual - alternative
};

AlternativeComparison alternative_vs_actual_rci(const DephasingParams& params, int round);

// CSV emission: columns p,m,n,branch,probability,entropy,rci,avg_rci,
// lower_bound,capacity. One row per branch plus one aggregate row
// (branch = "average"); cells that do not apply to a row stay empty.
std::string ledger_csv_header();
std::string ledger_csv_rows(const RoundLedger& ledger);
std::string ledger_csv(const RoundLedger& ledger);

}  // namespace dephasim::rates
