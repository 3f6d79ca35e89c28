#pragma once

#include <cstdint>
#include <vector>

namespace dephasim {

// One eigenvalue class of a Bell-diagonal state. `j` counts transmission
// errors; the two-index families carry a second count in `j2` (j2 < 0 marks
// a single-index entry). `value` is the per-eigenvector weight, repeated
// `multiplicity` times.
struct SpectrumEntry {
    int j = 0;
    int j2 = -1;
    double value = 0.0;
    std::int64_t multiplicity = 1;

    bool is_pair() const { return j2 >= 0; }
};

// Eigenvalue spectrum of a Bell-diagonal state over `pair_count` surviving
// Bell pairs. Normalized form sums (with multiplicity) to 1; the raw form
// sums to the probability of the branch it came from.
struct Spectrum {
    std::vector<SpectrumEntry> entries;
    int pair_count = 0;

    double total_weight() const {
        double s = 0.0;
        for (const auto& e : entries)
            s += static_cast<double>(e.multiplicity) * e.value;
        return s;
    }

    std::int64_t eigenvector_count() const {
        std::int64_t n = 0;
        for (const auto& e : entries)
            n += e.multiplicity;
        return n;
    }

    bool is_normalized(double tol = 1e-12) const {
        const double w = total_weight();
        return w > tol ? (w > 1.0 - tol && w < 1.0 + tol) : false;
    }

    // Rescales entries so the total weight becomes 1. No-op on an empty
    // spectrum (a zero-probability branch has no state to normalize).
    void normalize() {
        const double w = total_weight();
        if (entries.empty() || w <= 0.0)
            return;
        for (auto& e : entries)
            e.value /= w;
    }

    // All eigenvalues expanded by multiplicity, unsorted.
    std::vector<double> expanded() const {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(eigenvector_count()));
        for (const auto& e : entries)
            for (std::int64_t i = 0; i < e.multiplicity; ++i)
                out.push_back(e.value);
        return out;
    }
};

}  // namespace dephasim
