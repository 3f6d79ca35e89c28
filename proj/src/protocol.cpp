#include "dephasim/protocol.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "dephasim/core.hpp"

namespace dephasim::protocol {

namespace {

// Compensated summation so that reduction order cannot move results.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

std::vector<double> weight_table(double p, int bits) {
    std::vector<double> pw(bits + 1);
    for (int j = 0; j <= bits; ++j)
        pw[j] = std::pow(1.0 - p, bits - j) * std::pow(p, j);
    return pw;
}

int popcount(std::uint32_t x) { return std::popcount(x); }

double binomial_std_error(double phat, std::int64_t n) {
    if (n <= 0)
        return 0.0;
    return std::sqrt(std::max(0.0, phat * (1.0 - phat)) / static_cast<double>(n));
}

// Group bitmasks for round r of an n-round run: one group per context,
// varying coordinate r across the m copies. Coordinates below r are pinned
// to surviving slots, coordinates above r range over all copies.
std::vector<std::uint32_t> round_group_masks(int m, int n, int r) {
    std::vector<int> coord(n, 0);
    std::vector<std::uint32_t> masks;
    // Mixed-radix counter over all coordinates except r; radix m-1 below r.
    while (true) {
        std::uint32_t g = 0;
        for (int v = 0; v < m; ++v) {
            coord[r - 1] = v;
            std::uint32_t idx = 0, scale = 1;
            for (int k = 0; k < n; ++k) {
                idx += static_cast<std::uint32_t>(coord[k]) * scale;
                scale *= static_cast<std::uint32_t>(m);
            }
            g |= 1u << idx;
        }
        masks.push_back(g);
        int k = 0;
        for (; k < n; ++k) {
            if (k == r - 1)
                continue;
            const int radix = k < r - 1 ? m - 1 : m;
            if (++coord[k] < radix)
                break;
            coord[k] = 0;
        }
        if (k == n)
            return masks;
    }
}

std::vector<std::vector<std::uint32_t>> all_group_masks(int m, int n) {
    std::vector<std::vector<std::uint32_t>> groups;
    groups.reserve(n);
    for (int r = 1; r <= n; ++r)
        groups.push_back(round_group_masks(m, n, r));
    return groups;
}

// Rounds survived by a pattern before the first odd-parity group.
int rounds_passed(std::uint32_t mask, const std::vector<std::vector<std::uint32_t>>& groups) {
    int passed = 0;
    for (const auto& round : groups) {
        for (std::uint32_t g : round)
            if (popcount(mask & g) & 1)
                return passed;
        ++passed;
    }
    return passed;
}

}  // namespace

const BranchOutcome& Round2Outcomes::get(const BranchTag& tag) const {
    if (tag == BranchTag::s1s2())
        return ss;
    if (tag == BranchTag::s1f2())
        return sf;
    if (tag == BranchTag::f1s2())
        return fs;
    if (tag == BranchTag::f1f2())
        return ff;
    throw std::invalid_argument("expected a two-round branch tag, got " + tag.name());
}

Round1Outcomes enumerate_round1(const DephasingParams& params) {
    params.validate();
    const int m = params.m;
    if (m > 20)
        throw std::domain_error("enumerate_round1 is exhaustive over 2^m patterns; m <= 20");

    const auto pw = weight_table(params.p, m);
    KahanSum prob[2], fid[2];
    std::vector<std::map<int, std::int64_t>> mult(2);

    const std::uint32_t end = 1u << m;
    for (std::uint32_t mask = 0; mask < end; ++mask) {
        const int j = popcount(mask);
        const int parity = j & 1;  // 0: success, 1: failure
        prob[parity].add(pw[j]);
        if (pw[j] > 0.0)
            ++mult[parity][j];
        if (!(mask & 1u))  // first surviving slot carries no flip
            fid[parity].add(pw[j]);
    }

    auto build = [&](int parity, BranchTag tag) {
        BranchOutcome out;
        out.tag = tag;
        out.probability = prob[parity].sum;
        out.spectrum.pair_count = m - 1;
        if (out.probability <= 0.0)
            return out;
        for (const auto& [j, count] : mult[parity])
            out.spectrum.entries.push_back({j, -1, pw[j] / out.probability, count});
        out.reduced_pair_fidelity = fid[parity].sum / out.probability;
        return out;
    };
    return {build(0, BranchTag::s1()), build(1, BranchTag::f1())};
}

Round2Outcomes enumerate_round2(const DephasingParams& params) {
    params.validate();
    const int m = params.m;
    const int bits = m * m;
    if (bits > 20)
        throw std::domain_error("enumerate_round2 is exhaustive over 2^(m*m) patterns; m <= 4");

    const auto pw = weight_table(params.p, bits);
    const int survivors = (m - 1) * (m - 1);

    // Per-branch totals plus per-survivor-configuration weight sums for the
    // pooled failure branches.
    KahanSum group_total[2], success_total[2], success_fid[2], fail_fid[2];
    std::map<int, std::int64_t> success_mult[2];
    std::vector<double> fail_by_config[2];
    fail_by_config[0].assign(std::size_t{1} << survivors, 0.0);
    fail_by_config[1].assign(std::size_t{1} << survivors, 0.0);

    const std::uint32_t row_mask = (1u << m) - 1u;
    const std::uint32_t end = 1u << bits;
    for (std::uint32_t mask = 0; mask < end; ++mask) {
        // Round 1: every row block must share one parity.
        int row_parity = popcount(mask & row_mask) & 1;
        bool homogeneous = true;
        for (int r = 1; r < m && homogeneous; ++r)
            homogeneous = (popcount((mask >> (r * m)) & row_mask) & 1) == row_parity;
        if (!homogeneous)
            continue;

        const double w = pw[popcount(mask)];
        group_total[row_parity].add(w);

        // Round 2: regrouped columns over the surviving slots, all even.
        bool even_columns = true;
        for (int c = 0; c < m - 1 && even_columns; ++c) {
            int par = 0;
            for (int r = 0; r < m; ++r)
                par ^= (mask >> (r * m + c)) & 1u;
            even_columns = par == 0;
        }

        std::uint32_t config = 0;
        for (int r = 0; r < m - 1; ++r)
            for (int c = 0; c < m - 1; ++c)
                config |= ((mask >> (r * m + c)) & 1u) << (r * (m - 1) + c);

        const bool slot_clean = (mask & 1u) == 0;
        if (even_columns) {
            success_total[row_parity].add(w);
            if (w > 0.0)
                ++success_mult[row_parity][popcount(mask)];
            if (slot_clean)
                success_fid[row_parity].add(w);
        } else {
            fail_by_config[row_parity][config] += w;
            if (slot_clean)
                fail_fid[row_parity].add(w);
        }
    }

    const StepResult step[2] = {StepResult::success, StepResult::failure};
    auto build_success = [&](int parity, BranchTag tag) {
        BranchOutcome out;
        out.tag = tag;
        out.spectrum.pair_count = survivors;
        const double total = group_total[parity].sum;
        if (total <= 0.0)
            return out;
        const double st = success_total[parity].sum;
        out.probability = st / total;
        if (st <= 0.0)
            return out;
        for (const auto& [j, count] : success_mult[parity])
            out.spectrum.entries.push_back({j, -1, pw[j] / st, count});
        out.reduced_pair_fidelity = success_fid[parity].sum / st;
        return out;
    };

    auto build_failure = [&](int parity, BranchTag tag) {
        BranchOutcome out;
        out.tag = tag;
        out.spectrum.pair_count = survivors;
        const double total = group_total[parity].sum;
        if (total <= 0.0)
            return out;
        const double ft = total - success_total[parity].sum;
        out.probability = ft / total;
        if (ft <= 0.0) {
            out.probability = 0.0;
            return out;
        }

        // Group survivor configurations into (j1, j2) classes and insist the
        // pooled weights agree within each class.
        std::map<std::pair<int, int>, std::pair<double, std::int64_t>> classes;
        for (std::uint32_t config = 0; config < (1u << survivors); ++config) {
            const double w = fail_by_config[parity][config];
            int j1 = 0;
            std::uint32_t colpar = 0;
            for (int r = 0; r < m - 1; ++r) {
                const std::uint32_t row = (config >> (r * (m - 1))) & ((1u << (m - 1)) - 1u);
                j1 += core::completed_weight(popcount(row), step[parity]);
                colpar ^= row;
            }
            const int j2 = j1 + core::completed_weight(popcount(colpar), step[parity]);
            const double value = w / ft;
            auto [it, fresh] = classes.try_emplace({j1, j2}, value, 1);
            if (!fresh) {
                const double ref = it->second.first;
                if (std::abs(value - ref) > 1e-9 * std::max(1.0, std::abs(ref)))
                    throw std::logic_error("pooled failure weights disagree within class (" +
                                           std::to_string(j1) + ", " + std::to_string(j2) + ")");
                ++it->second.second;
            }
        }
        for (const auto& [key, vc] : classes)
            if (vc.first > 0.0)
                out.spectrum.entries.push_back({key.first, key.second, vc.first, vc.second});
        out.reduced_pair_fidelity = fail_fid[parity].sum / ft;
        return out;
    };

    Round2Outcomes out;
    out.ss = build_success(0, BranchTag::s1s2());
    out.sf = build_failure(0, BranchTag::s1f2());
    out.fs = build_success(1, BranchTag::f1s2());
    out.ff = build_failure(1, BranchTag::f1f2());
    return out;
}

std::vector<LineageRound> enumerate_rounds(const DephasingParams& params, int rounds) {
    params.validate();
    if (rounds < 1)
        throw std::domain_error("enumerate_rounds needs rounds >= 1");
    double bits_d = std::pow(static_cast<double>(params.m), rounds);
    if (bits_d > 24.0)
        throw std::domain_error(
            "enumerate_rounds is exhaustive over 2^(m^rounds) patterns (m^rounds <= 24); "
            "use monte_carlo_rounds beyond");
    const int m = params.m;
    const int bits = static_cast<int>(bits_d);

    const auto groups = all_group_masks(m, rounds);
    const auto pw = weight_table(params.p, bits);

    std::vector<KahanSum> lineage(rounds + 1), clean(rounds + 1);
    const std::uint32_t end_mask = 1u << bits;
    for (std::uint32_t mask = 0; mask < end_mask; ++mask) {
        const double w = pw[popcount(mask)];
        const int passed = rounds_passed(mask, groups);
        const bool slot_clean = (mask & 1u) == 0;
        for (int r = 0; r <= passed; ++r) {
            lineage[r].add(w);
            if (slot_clean)
                clean[r].add(w);
        }
    }

    std::vector<LineageRound> out;
    out.reserve(rounds);
    for (int r = 1; r <= rounds; ++r) {
        LineageRound rec;
        rec.round = r;
        const double prev = lineage[r - 1].sum;
        rec.lineage_probability = lineage[r].sum;
        rec.success_probability = prev > 0.0 ? lineage[r].sum / prev : 0.0;
        rec.failure_probability = 1.0 - rec.success_probability;
        rec.fidelity = lineage[r].sum > 0.0 ? clean[r].sum / lineage[r].sum : 0.0;
        out.push_back(rec);
    }
    return out;
}

McRounds monte_carlo_rounds(const DephasingParams& params, int rounds, std::int64_t samples,
                            std::uint64_t seed) {
    params.validate();
    if (rounds < 1)
        throw std::domain_error("monte_carlo_rounds needs rounds >= 1");
    if (samples < 1)
        throw std::domain_error("monte_carlo_rounds needs samples >= 1");
    const double bits_d = std::pow(static_cast<double>(params.m), rounds);
    if (bits_d > 32.0)
        throw std::domain_error("monte_carlo_rounds supports at most 32 raw pairs per sample");
    const int bits = static_cast<int>(bits_d);

    const auto groups = all_group_masks(params.m, rounds);

    // Raw engine words against a fixed threshold keep the stream identical
    // across standard libraries; distributions would not.
    std::mt19937_64 rng(seed);
    const std::uint64_t threshold =
        static_cast<std::uint64_t>(params.p * 18446744073709551616.0);

    std::vector<std::int64_t> accepted(rounds + 1, 0), clean(rounds + 1, 0);
    accepted[0] = samples;
    for (std::int64_t s = 0; s < samples; ++s) {
        std::uint32_t mask = 0;
        for (int b = 0; b < bits; ++b)
            mask |= static_cast<std::uint32_t>(rng() < threshold) << b;
        const int passed = rounds_passed(mask, groups);
        const bool slot_clean = (mask & 1u) == 0;
        for (int r = 1; r <= passed; ++r) {
            ++accepted[r];
            if (slot_clean)
                ++clean[r];
        }
    }

    McRounds out;
    out.samples = samples;
    out.seed = seed;
    for (int r = 1; r <= rounds; ++r) {
        McLineageRound rec;
        rec.round = r;
        rec.accepted = accepted[r];
        const std::int64_t prev = accepted[r - 1];
        const double ps = prev > 0 ? static_cast<double>(accepted[r]) / prev : 0.0;
        rec.success_probability = {ps, binomial_std_error(ps, prev)};
        const double f =
            accepted[r] > 0 ? static_cast<double>(clean[r]) / accepted[r] : 0.0;
        rec.fidelity = {f, binomial_std_error(f, accepted[r])};
        out.rounds.push_back(rec);
    }
    return out;
}

McRound2 monte_carlo_round2(const DephasingParams& params, std::int64_t samples,
                            std::uint64_t seed) {
    params.validate();
    if (samples < 1)
        throw std::domain_error("monte_carlo_round2 needs samples >= 1");
    const int m = params.m;
    const int bits = m * m;
    if (bits > 32)
        throw std::domain_error("monte_carlo_round2 supports at most 32 raw pairs per sample");

    std::mt19937_64 rng(seed);
    const std::uint64_t threshold =
        static_cast<std::uint64_t>(params.p * 18446744073709551616.0);
    const std::uint32_t row_mask = (1u << m) - 1u;

    std::int64_t n_group[2] = {0, 0}, n_success[2] = {0, 0}, n_clean_success[2] = {0, 0};
    for (std::int64_t s = 0; s < samples; ++s) {
        std::uint32_t mask = 0;
        for (int b = 0; b < bits; ++b)
            mask |= static_cast<std::uint32_t>(rng() < threshold) << b;

        const int row_parity = popcount(mask & row_mask) & 1;
        bool homogeneous = true;
        for (int r = 1; r < m && homogeneous; ++r)
            homogeneous = (popcount((mask >> (r * m)) & row_mask) & 1) == row_parity;
        if (!homogeneous)
            continue;
        ++n_group[row_parity];

        bool even_columns = true;
        for (int c = 0; c < m - 1 && even_columns; ++c) {
            int par = 0;
            for (int r = 0; r < m; ++r)
                par ^= (mask >> (r * m + c)) & 1u;
            even_columns = par == 0;
        }
        if (even_columns) {
            ++n_success[row_parity];
            if ((mask & 1u) == 0)
                ++n_clean_success[row_parity];
        }
    }

    auto conditional = [](std::int64_t hits, std::int64_t base) {
        const double v = base > 0 ? static_cast<double>(hits) / base : 0.0;
        return Estimate{v, binomial_std_error(v, base)};
    };

    McRound2 out;
    out.samples = samples;
    out.seed = seed;
    out.p_homogeneous_success = conditional(n_group[0], samples);
    out.p_homogeneous_failure = conditional(n_group[1], samples);
    out.p_s1s2 = conditional(n_success[0], n_group[0]);
    out.p_f1s2 = conditional(n_success[1], n_group[1]);
    out.fidelity_s1s2 = conditional(n_clean_success[0], n_success[0]);
    return out;
}

nlohmann::json branch_report(const BranchOutcome& outcome) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : outcome.spectrum.entries) {
        nlohmann::json rec;
        if (e.is_pair()) {
            rec["j1"] = e.j;
            rec["j2"] = e.j2;
        } else {
            rec["j"] = e.j;
        }
        rec["value"] = e.value;
        rec["multiplicity"] = e.multiplicity;
        entries.push_back(rec);
    }
    return nlohmann::json{{"tag", outcome.tag.name()},
                          {"probability", outcome.probability},
                          {"fidelity", outcome.reduced_pair_fidelity},
                          {"pair_count", outcome.spectrum.pair_count},
                          {"spectrum", entries}};
}

}  // namespace dephasim::protocol
