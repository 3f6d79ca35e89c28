#include "dephasim/core.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dephasim::core {

namespace {

// Branch probabilities of the first round: (1 +/- (1-2p)^m)/2.
double round1_probability(double p, int m, StepResult r) {
    const double q = 1.0 - 2.0 * p;
    const double qm = std::pow(q, m);
    return r == StepResult::success ? 0.5 * (1.0 + qm) : 0.5 * (1.0 - qm);
}

void check_round1_tag(const BranchTag& branch) {
    if (!branch.is_round1_only())
        throw std::invalid_argument("round1_spectrum expects tag s1 or f1, got " + branch.name());
}

void check_round2_tag(const BranchTag& branch) {
    if (branch.is_round1_only())
        throw std::invalid_argument("round2_spectrum expects a two-round tag, got " +
                                    branch.name());
}

}  // namespace

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("binary_entropy argument must lie in [0, 1], got " +
                                std::to_string(x));
    if (x == 0.0 || x == 1.0)
        return 0.0;
    return -(x * std::log2(x) + (1.0 - x) * std::log2(1.0 - x));
}

double capacity(double p) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::domain_error("capacity argument must lie in [0, 1/2], got " +
                                std::to_string(p));
    return 1.0 - binary_entropy(p);
}

double node_dephasing(double p, int segments) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::domain_error("node_dephasing probability must lie in [0, 1/2]");
    if (segments < 1)
        throw std::domain_error("node_dephasing needs segments >= 1");
    if (segments == 1)
        return p;
    return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, 1.0 / segments));
}

std::int64_t binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        return 0;
    if (n > 62)
        throw std::overflow_error("binomial(n, k) exact only for n <= 62; use log_binomial");
    k = std::min(k, n - k);
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;  // exact: c*(n-k+i) is divisible by i here
    return c;
}

double log_binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        throw std::domain_error("log_binomial out of range");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

BranchSpectrum round1_spectrum(const DephasingParams& params, const BranchTag& branch) {
    params.validate();
    check_round1_tag(branch);
    const int m = params.m;
    if (m > 62)
        throw std::domain_error("round1_spectrum materializes binomial multiplicities; m <= 62");

    const double p = params.p;
    const double prob = round1_probability(p, m, branch.round1);

    BranchSpectrum out;
    out.probability = prob;
    out.spectrum.pair_count = m - 1;
    if (prob <= 0.0)
        return out;

    const int first = branch.round1 == StepResult::success ? 0 : 1;
    for (int j = first; j <= m; j += 2) {
        const double raw = std::pow(1.0 - p, m - j) * std::pow(p, j);
        if (raw == 0.0)
            continue;
        out.spectrum.entries.push_back({j, -1, raw / prob, binomial(m, j)});
    }
    return out;
}

double round2_success_probability(const DephasingParams& params, StepResult given) {
    params.validate();
    const int m = params.m;
    const double p = params.p;
    const double q = 1.0 - 2.0 * p;

    const double p1 = round1_probability(p, m, given);
    if (p1 <= 0.0)
        return 0.0;  // conditioning event never occurs (p = 0 failure lineage)

    // Parity character sum over row/column subsets, folded so that all
    // exponents stay nonnegative. Sign alternates only for the
    // all-rows-odd conditioning.
    const bool odd_rows = given == StepResult::failure;
    double sum = 0.0;
    if (m % 2 == 1) {
        for (int r = 0; r <= (m - 1) / 2; ++r) {
            const double base = std::pow(q, m - 2 * r);
            double term = static_cast<double>(binomial(m, r)) * std::pow(q, m * r);
            if (odd_rows)
                term *= std::pow(1.0 + base, m - 1) * (1.0 - base);
            else
                term *= std::pow(1.0 + base, m);
            sum += (odd_rows && (r & 1)) ? -term : term;
        }
    } else {
        for (int r = 0; r < m / 2; ++r) {
            const double base = std::pow(q, m - 2 * r);
            double term = static_cast<double>(binomial(m, r)) * std::pow(q, m * r) *
                          std::pow(1.0 + base, m);
            sum += (odd_rows && (r & 1)) ? -term : term;
        }
        double mid = std::ldexp(static_cast<double>(binomial(m, m / 2)), m - 1) *
                     std::pow(q, 0.5 * m * m);
        if (odd_rows && ((m / 2) & 1))
            mid = -mid;
        sum += mid;
    }
    const double joint = std::ldexp(sum, -(2 * m - 1));
    return joint / std::pow(p1, m);
}

Round2Multiplicities round2_multiplicities(int m, StepResult round1) {
    if (m < 2)
        throw std::domain_error("round2_multiplicities needs m >= 2");
    if (m > 8)
        throw std::domain_error(
            "round2_multiplicities exceeds exact 64-bit counts beyond m = 8");

    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, Round2Multiplicities> cache;
    const std::pair<int, int> key{m, round1 == StepResult::success ? 0 : 1};
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
    }

    // Count surviving (m-1)x(m-1) flag configurations by dynamic
    // programming over the survivor copies. State: (k, j1) where k is the
    // Hamming weight of the running column-parity vector and j1 the
    // accumulated completed row weight. By column symmetry only k matters.
    const int slots = m - 1;
    const int j1_max = m * (m - 1);
    std::vector<std::vector<std::int64_t>> state(slots + 1,
                                                 std::vector<std::int64_t>(j1_max + 1, 0));
    state[0][0] = 1;

    for (int copy = 0; copy < m - 1; ++copy) {
        std::vector<std::vector<std::int64_t>> next(slots + 1,
                                                    std::vector<std::int64_t>(j1_max + 1, 0));
        for (int k = 0; k <= slots; ++k) {
            for (int j1 = 0; j1 <= j1_max; ++j1) {
                const std::int64_t c = state[k][j1];
                if (c == 0)
                    continue;
                for (int w = 0; w <= slots; ++w) {
                    const int dj = completed_weight(w, round1);
                    if (j1 + dj > j1_max)
                        continue;
                    // Overlap i between the row's w ones and the k parity ones.
                    for (int i = std::max(0, w - (slots - k)); i <= std::min(w, k); ++i) {
                        const std::int64_t ways = binomial(k, i) * binomial(slots - k, w - i);
                        next[k - i + (w - i)][j1 + dj] += c * ways;
                    }
                }
            }
        }
        state.swap(next);
    }

    Round2Multiplicities table;
    table.m = m;
    table.round1 = round1;
    for (int k = 0; k <= slots; ++k) {
        for (int j1 = 0; j1 <= j1_max; ++j1) {
            if (state[k][j1] == 0)
                continue;
            // The control copy's row is forced: its free slots equal the
            // column parities (weight k), plus its own completion bit.
            const int j2 = j1 + completed_weight(k, round1);
            table.classes[{j1, j2}] += state[k][j1];
        }
    }

    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.emplace(key, table);
    return table;
}

std::map<int, std::int64_t> Round2Multiplicities::by_total_errors() const {
    std::map<int, std::int64_t> out;
    for (const auto& [key, count] : classes)
        out[key.second] += count;
    return out;
}

std::int64_t Round2Multiplicities::total() const {
    std::int64_t n = 0;
    for (const auto& [key, count] : classes)
        n += count;
    return n;
}

BranchSpectrum round2_spectrum(const DephasingParams& params, const BranchTag& branch) {
    params.validate();
    check_round2_tag(branch);
    const int m = params.m;
    const double p = params.p;

    BranchSpectrum out;
    out.spectrum.pair_count = (m - 1) * (m - 1);

    const double p1 = round1_probability(p, m, branch.round1);
    if (p1 <= 0.0)
        return out;  // lineage never reached

    const double p1_pow_m = std::pow(p1, m);
    const double p_succ = round2_success_probability(params, branch.round1);
    const auto table = round2_multiplicities(m, branch.round1);

    if (*branch.round2 == StepResult::success) {
        out.probability = p_succ;
        if (p_succ <= 0.0)
            return out;
        const double norm = p1_pow_m * p_succ;
        for (const auto& [j2, count] : table.by_total_errors()) {
            const double raw = std::pow(1.0 - p, m * m - j2) * std::pow(p, j2);
            if (raw == 0.0)
                continue;
            out.spectrum.entries.push_back({j2, -1, raw / norm, count});
        }
        return out;
    }

    const double p_fail = 1.0 - p_succ;
    out.probability = p_fail;
    if (p_fail <= 0.0) {
        out.probability = 0.0;
        return out;
    }
    // Pooled failure state: the round-1 tensor-power mixture minus the
    // success component, class by class.
    const double p1_pow_m1 = std::pow(p1, m - 1);
    for (const auto& [key, count] : table.classes) {
        const auto [j1, j2] = key;
        const double mix = std::pow(1.0 - p, m * (m - 1) - j1) * std::pow(p, j1) / p1_pow_m1;
        const double succ = std::pow(1.0 - p, m * m - j2) * std::pow(p, j2) / p1_pow_m;
        double value = (mix - succ) / p_fail;
        if (value < -1e-12)
            throw std::logic_error("negative round-2 eigenvalue at (" + std::to_string(j1) +
                                   ", " + std::to_string(j2) +
                                   "): inconsistent range or multiplicity");
        if (value <= 0.0)
            continue;
        out.spectrum.entries.push_back({j1, j2, value, count});
    }
    return out;
}

}  // namespace dephasim::core
