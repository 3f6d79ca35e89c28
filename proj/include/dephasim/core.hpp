#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "dephasim/params.hpp"
#include "dephasim/spectrum.hpp"

namespace dephasim::core {

/// Binary Shannon entropy in bits, with the 0*log(0) = 0 convention.
double binary_entropy(double x);

/// Two-way assisted capacity of the dephasing channel, 1 - H2(p).
double capacity(double p);

// Per-segment dephasing probability such that composing `segments` equal
// segments reproduces an end-to-end dephasing of p: the off-diagonal
// factor obeys (1 - 2*p_e)^segments = 1 - 2p.
double node_dephasing(double p, int segments);

std::int64_t binomial(int n, int k);
double log_binomial(int n, int k);

// A conditional branch: its probability together with the normalized
// eigenvalue spectrum of the post-measurement state.
struct BranchSpectrum {
    double probability = 0.0;
    Spectrum spectrum;
};

// Round-1 closed form. Success keeps the even error counts j = 0, 2, ...
// with eigenvalues (1-p)^(m-j) p^j / P and multiplicity C(m, j), where
// P = (1 + (1-2p)^m)/2; failure keeps the odd counts. A zero-probability
// branch comes back with an empty spectrum.
BranchSpectrum round1_spectrum(const DephasingParams& params, const BranchTag& branch);

// Round-2 closed form, conditioned on a homogeneous round-1 outcome of all
// m blocks. The returned probability is conditional on that outcome
// (success + failure of a given lineage sum to 1). Eigenvalues follow the
// error-count power laws; multiplicities come from the parity-class count
// below. Throws std::logic_error if a pooled-failure eigenvalue turns out
// negative beyond -1e-12, which would indicate a range or multiplicity bug.
BranchSpectrum round2_spectrum(const DephasingParams& params, const BranchTag& branch);

// Probability that round 2 succeeds (every regrouped column block has even
// parity) given all m row blocks shared the round-1 outcome `given`.
// Character-sum closed form with prefactor 2^-(2m-1).
double round2_success_probability(const DephasingParams& params, StepResult given);

// Multiplicity table for the round-2 spectra. Keys are (j1, j2): j1 is the
// error count over the m-1 surviving row blocks after their round-1
// completion, j2 adds the forced control-copy row. Values count surviving
// (m-1)x(m-1) flag configurations in that class; they sum to 2^((m-1)^2).
// Exact in 64-bit for m <= 8.
struct Round2Multiplicities {
    int m = 2;
    StepResult round1 = StepResult::success;
    std::map<std::pair<int, int>, std::int64_t> classes;

    std::map<int, std::int64_t> by_total_errors() const;  // keyed by j2
    std::int64_t total() const;
};

Round2Multiplicities round2_multiplicities(int m, StepResult round1);

// Error count of a row after appending its parity-completion bit: even
// completion rounds w up to even, odd completion rounds up to odd.
inline int completed_weight(int w, StepResult parity) {
    if (parity == StepResult::success)
        return w + (w & 1);
    return w + 1 - (w & 1);
}

}  // namespace dephasim::core
