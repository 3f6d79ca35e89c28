#include "dephasim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "dephasim/core.hpp"
#include "dephasim/densesim.hpp"
#include "dephasim/protocol.hpp"
#include "dephasim/purify_map.hpp"
#include "dephasim/rates.hpp"

namespace dephasim::verify {

namespace {

std::vector<double> linspace_grid(double start, double stop, double step) {
    std::vector<double> out;
    for (double x = start; x <= stop + 1e-12; x += step)
        out.push_back(std::min(x, stop));
    return out;
}

std::string at(double p, int m) {
    std::ostringstream os;
    os << " at p=" << p << ", m=" << m;
    return os.str();
}

// A failing check accumulates messages; empty means pass.
class Failures {
  public:
    void add(const std::string& msg) {
        if (count_ < 6)
            text_ += (text_.empty() ? "" : "; ") + msg;
        ++count_;
    }
    void expect(bool ok, const std::string& msg) {
        if (!ok)
            add(msg);
    }
    std::string str() const {
        if (count_ > 6)
            return text_ + "; (+" + std::to_string(count_ - 6) + " more)";
        return text_;
    }

  private:
    std::string text_;
    int count_ = 0;
};

Spectrum binomial_spectrum(int pairs, double p) {
    Spectrum s;
    s.pair_count = pairs;
    for (int j = 0; j <= pairs; ++j) {
        const double v = std::pow(1.0 - p, pairs - j) * std::pow(p, j);
        if (v > 0.0)
            s.entries.push_back({j, -1, v, core::binomial(pairs, j)});
    }
    return s;
}

// Sorted eigenvalues of a spectrum padded with zeros up to `dim`.
std::vector<double> padded_descending(const Spectrum& s, std::int64_t dim) {
    std::vector<double> v = s.expanded();
    v.resize(static_cast<std::size_t>(dim), 0.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

double max_spectrum_difference(const Spectrum& a, const Spectrum& b) {
    const std::int64_t dim = std::max(a.eigenvector_count(), b.eigenvector_count());
    const auto va = padded_descending(a, dim);
    const auto vb = padded_descending(b, dim);
    double worst = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i)
        worst = std::max(worst, std::abs(va[i] - vb[i]));
    return worst;
}

// Dense-oracle run of round 1: prepare, CNOTs, measure the last pair,
// pool matching outcomes.
densesim::PooledMeasurement dense_round1(int m, double p) {
    auto state = densesim::prepare_and_dephase(m, p);
    state = densesim::apply_circuit(state, densesim::round1_circuit(m));
    return densesim::pool_x_outcomes(densesim::measure_pair_x(state, m - 1));
}

// ---- core ----------------------------------------------------------------

std::string check_core_normalization() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.0, 0.5, 0.05)) {
            const DephasingParams params{p, m, 1};
            for (auto tag : {BranchTag::s1(), BranchTag::f1()}) {
                const auto b = core::round1_spectrum(params, tag);
                if (b.probability > 0.0)
                    f.expect(std::abs(b.spectrum.total_weight() - 1.0) <= 1e-12,
                             "round-1 " + tag.name() + " spectrum not normalized" + at(p, m));
            }
            for (auto tag : {BranchTag::s1s2(), BranchTag::s1f2(), BranchTag::f1s2(),
                             BranchTag::f1f2()}) {
                const auto b = core::round2_spectrum(params, tag);
                const double p1 =
                    tag.round1 == StepResult::success ? 1.0 : (p > 0.0 ? 1.0 : 0.0);
                if (p1 > 0.0 && b.probability > 0.0)
                    f.expect(std::abs(b.spectrum.total_weight() - 1.0) <= 1e-12,
                             "round-2 " + tag.name() + " spectrum not normalized" + at(p, m));
            }
        }
    }
    return f.str();
}

std::string check_core_branch_completeness() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.0, 0.5, 0.05)) {
            const DephasingParams params{p, m, 1};
            const double ps = core::round1_spectrum(params, BranchTag::s1()).probability;
            const double pf = core::round1_spectrum(params, BranchTag::f1()).probability;
            f.expect(std::abs(ps + pf - 1.0) <= 1e-15, "P_s1 + P_f1 != 1" + at(p, m));
            const double pss = core::round2_spectrum(params, BranchTag::s1s2()).probability;
            const double psf = core::round2_spectrum(params, BranchTag::s1f2()).probability;
            f.expect(std::abs(pss + psf - 1.0) <= 1e-15, "P_s1s2 + P_s1f2 != 1" + at(p, m));
            if (p > 0.0) {
                const double pfs =
                    core::round2_spectrum(params, BranchTag::f1s2()).probability;
                const double pff =
                    core::round2_spectrum(params, BranchTag::f1f2()).probability;
                f.expect(std::abs(pfs + pff - 1.0) <= 1e-15,
                         "P_f1s2 + P_f1f2 != 1" + at(p, m));
            }
        }
    }
    return f.str();
}

std::string check_core_mixture_identity() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.0, 0.5, 0.05)) {
            const DephasingParams params{p, m, 1};
            const auto s = core::round1_spectrum(params, BranchTag::s1());
            const auto fa = core::round1_spectrum(params, BranchTag::f1());
            auto value_of = [](const core::BranchSpectrum& b, int j) {
                for (const auto& e : b.spectrum.entries)
                    if (e.j == j)
                        return e.value * 1.0;
                return 0.0;
            };
            // Weighted branch values must reassemble the plain binomial
            // weights of the m-1 surviving pairs, entry by entry.
            for (int w = 0; w < m; ++w) {
                const int je = w + (w & 1);
                const int jo = w + 1 - (w & 1);
                const double got = s.probability * value_of(s, je) +
                                   fa.probability * value_of(fa, jo);
                const double want = std::pow(1.0 - p, m - 1 - w) * std::pow(p, w);
                f.expect(std::abs(got - want) <= 1e-12,
                         "mixture identity broken at weight " + std::to_string(w) + at(p, m));
            }
        }
    }
    return f.str();
}

std::string check_core_monotonicity() {
    Failures f;
    const auto grid = linspace_grid(0.0, 0.5, 0.05);
    for (int m = 2; m <= 6; ++m) {
        double prev = 1.0;
        for (double p : grid) {
            const double ps =
                core::round1_spectrum({p, m, 1}, BranchTag::s1()).probability;
            f.expect(ps <= prev + 1e-15, "P_s1 not non-increasing in p" + at(p, m));
            prev = ps;
        }
    }
    for (double p : grid) {
        if (p <= 0.0)
            continue;
        double prev = 1.0;
        for (int m = 2; m <= 6; ++m) {
            const double ps =
                core::round1_spectrum({p, m, 1}, BranchTag::s1()).probability;
            f.expect(ps <= prev + 1e-15, "P_s1 not non-increasing in m" + at(p, m));
            prev = ps;
        }
    }
    return f.str();
}

std::string check_core_degenerate_end() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        const DephasingParams params{0.5, m, 1};
        for (auto tag : {BranchTag::s1(), BranchTag::f1()}) {
            const auto b = core::round1_spectrum(params, tag);
            f.expect(std::abs(b.probability - 0.5) <= 1e-15,
                     tag.name() + " probability != 1/2 at p=1/2, m=" + std::to_string(m));
            for (const auto& e : b.spectrum.entries)
                f.expect(std::abs(e.value - b.spectrum.entries.front().value) <= 1e-15,
                         tag.name() + " spectrum not uniform at p=1/2, m=" + std::to_string(m));
        }
        for (auto tag :
             {BranchTag::s1s2(), BranchTag::s1f2(), BranchTag::f1s2(), BranchTag::f1f2()}) {
            const auto b = core::round2_spectrum(params, tag);
            for (const auto& e : b.spectrum.entries)
                f.expect(std::abs(e.value - b.spectrum.entries.front().value) <= 1e-14,
                         tag.name() + " spectrum not uniform at p=1/2, m=" + std::to_string(m));
        }
    }
    return f.str();
}

// ---- densesim ------------------------------------------------------------

std::string check_densesim_round1_equivalence() {
    Failures f;
    for (int m = 2; m <= 5; ++m) {
        for (double p : {0.0, 0.1, 0.3, 0.5}) {
            const auto pooled = dense_round1(m, p);
            const DephasingParams params{p, m, 1};
            const auto cs = core::round1_spectrum(params, BranchTag::s1());
            const auto cf = core::round1_spectrum(params, BranchTag::f1());
            f.expect(std::abs(pooled.success.probability - cs.probability) <= 1e-10,
                     "success probability mismatch" + at(p, m));
            f.expect(std::abs(pooled.failure.probability - cf.probability) <= 1e-10,
                     "failure probability mismatch" + at(p, m));
            auto compare = [&](const densesim::MeasurementBranch& dense,
                               const core::BranchSpectrum& closed, const char* which) {
                if (closed.probability <= 0.0)
                    return;
                auto eigs = dense.post_state.eigenvalues();
                std::sort(eigs.begin(), eigs.end(), std::greater<>());
                auto expect = padded_descending(closed.spectrum,
                                                static_cast<std::int64_t>(eigs.size()));
                double worst = 0.0;
                for (std::size_t i = 0; i < eigs.size(); ++i)
                    worst = std::max(worst, std::abs(eigs[i] - expect[i]));
                f.expect(worst <= 1e-10,
                         std::string(which) + " eigenvalue mismatch" + at(p, m));
            };
            compare(pooled.success, cs, "success");
            compare(pooled.failure, cf, "failure");
        }
    }
    return f.str();
}

std::string check_densesim_cptp() {
    Failures f;
    for (int m : {2, 3}) {
        for (double p : {0.0, 0.1, 0.3, 0.5}) {
            auto state = densesim::prepare_and_dephase(m, p);
            f.expect(std::abs(state.trace() - 1.0) <= 1e-12, "prepare trace" + at(p, m));
            f.expect(state.is_hermitian(1e-12), "prepare hermiticity" + at(p, m));
            auto after = densesim::apply_circuit(state, densesim::round1_circuit(m));
            f.expect(std::abs(after.trace() - 1.0) <= 1e-12, "circuit trace" + at(p, m));
            const auto branches = densesim::measure_pair_x(after, m - 1);
            double total = 0.0;
            for (const auto& b : branches) {
                total += b.probability;
                if (b.probability > 0.0) {
                    f.expect(b.post_state.is_hermitian(1e-12),
                             "post-state hermiticity" + at(p, m));
                    const auto eigs = b.post_state.eigenvalues();
                    f.expect(eigs.front() >= -1e-10, "post-state not PSD" + at(p, m));
                }
            }
            f.expect(std::abs(total - 1.0) <= 1e-12, "branches incomplete" + at(p, m));
        }
    }
    return f.str();
}

std::string check_densesim_x_parity() {
    Failures f;
    for (int m = 2; m <= 4; ++m) {
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
            std::vector<bool> flags(m);
            int parity = 0;
            for (int k = 0; k < m; ++k) {
                flags[k] = (mask >> k) & 1u;
                parity ^= flags[k];
            }
            auto state = densesim::prepare_bell_product(flags);
            state = densesim::apply_circuit(state, densesim::round1_circuit(m));
            const auto pooled = densesim::pool_x_outcomes(densesim::measure_pair_x(state, m - 1));
            const double want_success = parity ? 0.0 : 1.0;
            f.expect(std::abs(pooled.success.probability - want_success) <= 1e-12,
                     "pattern " + std::to_string(mask) + " parity law broken, m=" +
                         std::to_string(m));
        }
    }
    return f.str();
}

std::string check_densesim_bsm() {
    Failures f;
    for (double p : linspace_grid(0.05, 0.45, 0.05)) {
        const auto result = densesim::bsm_swap(p);
        for (const auto& b : result.branches) {
            f.expect(std::abs(b.probability - 0.25) <= 1e-12,
                     "branch " + b.outcome + " probability != 1/4 at p=" + std::to_string(p));
            const auto& rho = b.post_state.rho;
            const double off = std::max(std::abs(rho(0, 3)), std::abs(rho(1, 2)));
            f.expect(std::abs(off - 0.5 * (1.0 - 2.0 * p)) <= 1e-12,
                     "branch " + b.outcome + " off-diagonal != (1-2p)/2 at p=" +
                         std::to_string(p));
        }
    }
    return f.str();
}

// ---- protocol ------------------------------------------------------------

std::string check_protocol_parity_bookkeeping() {
    Failures f;
    for (int m = 2; m <= 8; ++m) {
        for (double p : {0.1, 0.3, 0.5}) {
            const auto r1 = protocol::enumerate_round1({p, m, 1});
            const double q = std::pow(1.0 - 2.0 * p, m);
            f.expect(std::abs(r1.success.probability - 0.5 * (1.0 + q)) <= 1e-12,
                     "success probability vs parity count" + at(p, m));
            f.expect(std::abs(r1.success.probability + r1.failure.probability - 1.0) <= 1e-12,
                     "branches do not cover all patterns" + at(p, m));
            for (const auto& branch : {r1.success, r1.failure}) {
                f.expect(branch.spectrum.eigenvector_count() == (1 << (m - 1)),
                         branch.tag.name() + " eigenvector count" + at(p, m));
                for (const auto& e : branch.spectrum.entries)
                    f.expect(e.multiplicity == core::binomial(m, e.j),
                             branch.tag.name() + " multiplicity at j=" + std::to_string(e.j) +
                                 at(p, m));
            }
        }
    }
    return f.str();
}

std::string check_protocol_closed_form_agreement() {
    Failures f;
    for (int m = 2; m <= 12; ++m) {
        for (double p : {0.0, 0.1, 0.3, 0.5}) {
            const DephasingParams params{p, m, 1};
            const auto enumd = protocol::enumerate_round1(params);
            for (auto [branch, tag] :
                 {std::pair{&enumd.success, BranchTag::s1()}, {&enumd.failure, BranchTag::f1()}}) {
                const auto closed = core::round1_spectrum(params, tag);
                f.expect(std::abs(branch->probability - closed.probability) <= 1e-10,
                         tag.name() + " probability" + at(p, m));
                if (closed.probability > 0.0)
                    f.expect(max_spectrum_difference(branch->spectrum, closed.spectrum) <= 1e-10,
                             tag.name() + " spectrum" + at(p, m));
            }
        }
    }
    for (int m = 2; m <= 4; ++m) {
        for (double p : {0.0, 0.1, 0.3, 0.5}) {
            const DephasingParams params{p, m, 2};
            const auto enumd = protocol::enumerate_round2(params);
            for (auto tag :
                 {BranchTag::s1s2(), BranchTag::s1f2(), BranchTag::f1s2(), BranchTag::f1f2()}) {
                const auto closed = core::round2_spectrum(params, tag);
                const auto& branch = enumd.get(tag);
                if (tag.round1 == StepResult::failure && p == 0.0)
                    continue;
                f.expect(std::abs(branch.probability - closed.probability) <= 1e-12,
                         tag.name() + " probability" + at(p, m));
                if (closed.probability > 0.0)
                    f.expect(max_spectrum_difference(branch.spectrum, closed.spectrum) <= 1e-12,
                             tag.name() + " spectrum" + at(p, m));
            }
        }
    }
    return f.str();
}

std::string check_protocol_conservation() {
    Failures f;
    for (int m = 2; m <= 4; ++m) {
        for (double p : {0.1, 0.3, 0.5}) {
            const DephasingParams params{p, m, 2};
            const auto enumd = protocol::enumerate_round2(params);
            for (auto parity : {StepResult::success, StepResult::failure}) {
                const auto& succ =
                    parity == StepResult::success ? enumd.ss : enumd.fs;
                const auto& fail =
                    parity == StepResult::success ? enumd.sf : enumd.ff;
                const auto r1tag =
                    parity == StepResult::success ? BranchTag::s1() : BranchTag::f1();
                const auto r1 = core::round1_spectrum(params, r1tag);
                const double p1m1 = std::pow(r1.probability, m - 1);

                // Success branch values keyed by total error count.
                std::map<int, double> succ_value;
                for (const auto& e : succ.spectrum.entries)
                    succ_value[e.j] = e.value;
                // Weighted success + pooled failure must rebuild the
                // (m-1)-fold tensor power of the round-1 branch per class.
                for (const auto& e : fail.spectrum.entries) {
                    const double mix =
                        std::pow(1.0 - p, m * (m - 1) - e.j) * std::pow(p, e.j) / p1m1;
                    const auto it = succ_value.find(e.j2);
                    f.expect(it != succ_value.end(),
                             "failure class (" + std::to_string(e.j) + "," +
                                 std::to_string(e.j2) + ") missing from success spectrum" +
                                 at(p, m));
                    const double got = e.value * fail.probability +
                                       (it != succ_value.end()
                                            ? it->second * succ.probability
                                            : 0.0);
                    f.expect(std::abs(got - mix) <= 1e-12,
                             "tensor-power reconstruction at (" + std::to_string(e.j) + "," +
                                 std::to_string(e.j2) + ")" + at(p, m));
                }
            }
        }
    }
    return f.str();
}

std::string check_protocol_monte_carlo(const Options& options) {
    Failures f;
    const DephasingParams params{0.1, 3, 2};
    const auto exact = protocol::enumerate_round2(params);
    const auto mc = protocol::monte_carlo_round2(params, options.mc_samples, options.mc_seed);

    const double p_s1_exact = std::pow(0.5 * (1.0 + std::pow(0.8, 3)), 3);
    const double p_f1_exact = std::pow(0.5 * (1.0 - std::pow(0.8, 3)), 3);
    auto within = [&](const protocol::Estimate& e, double truth, const char* what) {
        const double slack = 4.0 * std::max(e.std_error, 1e-12);
        f.expect(std::abs(e.value - truth) <= slack, std::string(what) + " off by more than 4 sigma");
    };
    within(mc.p_homogeneous_success, p_s1_exact, "P(all rows succeed)");
    within(mc.p_homogeneous_failure, p_f1_exact, "P(all rows fail)");
    within(mc.p_s1s2, exact.ss.probability, "P_s1s2");
    within(mc.p_f1s2, exact.fs.probability, "P_f1s2");
    within(mc.fidelity_s1s2, exact.ss.reduced_pair_fidelity, "s1s2 fidelity");
    return f.str();
}

std::string check_protocol_fidelity_ordering() {
    Failures f;
    for (double p : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45}) {
        for (int m : {2, 3, 4}) {
            const int rounds = m == 2 ? 4 : 2;
            const auto lineage = protocol::enumerate_rounds({p, m, rounds}, rounds);
            double prev = 1.0 - p;
            for (const auto& rec : lineage) {
                f.expect(rec.fidelity >= prev - 1e-12,
                         "fidelity decreased at round " + std::to_string(rec.round) + at(p, m));
                prev = rec.fidelity;
            }
        }
    }
    return f.str();
}

// ---- rates ---------------------------------------------------------------

std::string check_rates_bound(int round) {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.01, 0.49, 0.02)) {
            const DephasingParams params{p, m, round};
            const auto ledger = round == 1 ? rates::rci_round1(params) : rates::rci_round2(params);
            f.expect(ledger.average_rci >= ledger.lower_bound - 1e-9,
                     "average below lower bound" + at(p, m));
            f.expect(ledger.average_rci <= ledger.capacity + 1e-9,
                     "average above capacity" + at(p, m));
        }
    }
    return f.str();
}

std::string check_rates_mixture_entropy() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.01, 0.49, 0.02)) {
            const double s_mix = rates::entropy_of_spectrum(binomial_spectrum(m - 1, p));
            const double got = (m - 1 - s_mix) / m;
            const double want = (m - 1.0) / m * core::capacity(p);
            f.expect(std::abs(got - want) <= 1e-9, "mixture entropy identity" + at(p, m));
        }
    }
    return f.str();
}

std::string check_rates_bsm_equivalence() {
    Failures f;
    for (double p : linspace_grid(0.0, 0.5, 0.05)) {
        const auto result = densesim::bsm_swap(p);
        f.expect(std::abs(result.average_rci - core::capacity(p)) <= 1e-12,
                 "BSM average RCI != capacity at p=" + std::to_string(p));
    }
    return f.str();
}

std::string check_rates_concavity() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.01, 0.49, 0.02)) {
            const auto ledger = rates::rci_round1({p, m, 1});
            double weighted = 0.0;
            for (const auto& b : ledger.branches)
                weighted += b.probability * b.entropy;
            const double s_mix = rates::entropy_of_spectrum(binomial_spectrum(m - 1, p));
            f.expect(weighted <= s_mix + 1e-12, "concavity direction" + at(p, m));
        }
    }
    return f.str();
}

// ---- purify_map ----------------------------------------------------------

std::string check_map_contraction() {
    Failures f;
    for (int m = 2; m <= 8; ++m) {
        for (double p : linspace_grid(0.0, 0.5, 0.01)) {
            const double next = purify_map::map_step(p, m);
            f.expect(next <= p + 1e-15, "map increased p" + at(p, m));
            if (p > 0.0 && p < 0.5)
                f.expect(next < p, "map not strictly contracting" + at(p, m));
        }
    }
    return f.str();
}

std::string check_map_sandwich() {
    Failures f;
    for (int m : {2, 3, 4}) {
        for (double p : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49}) {
            const DephasingParams params{p, m, 2};
            const double fa1 = 1.0 - purify_map::map_step(p, m);
            const double fr1 = protocol::enumerate_round1(params).success.reduced_pair_fidelity;
            const double fa2 = 1.0 - purify_map::map_step(purify_map::map_step(p, m), m);
            const double fr2 = protocol::enumerate_round2(params).ss.reduced_pair_fidelity;
            f.expect(1.0 - p <= fa1 + 1e-12 && fa1 <= fr1 + 1e-12 && fr1 <= 1.0 + 1e-12,
                     "round-1 fidelity sandwich" + at(p, m));
            f.expect(1.0 - p <= fa2 + 1e-12 && fa2 <= fr2 + 1e-12 && fr2 <= 1.0 + 1e-12,
                     "round-2 fidelity sandwich" + at(p, m));
        }
    }
    return f.str();
}

std::string check_map_derivative_fd() {
    Failures f;
    const double h = 1e-6;
    for (int m = 2; m <= 6; ++m) {
        for (double p : linspace_grid(0.01, 0.45, 0.02)) {
            const double fd =
                (purify_map::map_step(p + h, m) - purify_map::map_step(p - h, m)) / (2.0 * h);
            const double exact = purify_map::map_derivative(p, m);
            f.expect(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)),
                     "derivative vs finite difference" + at(p, m));
        }
    }
    return f.str();
}

std::string check_map_super_stability() {
    Failures f;
    for (int m = 2; m <= 6; ++m) {
        const auto trace = purify_map::iterate_map(0.1, m, 8);
        f.expect(purify_map::map_derivative(0.0, m) == 0.0,
                 "derivative at 0 not exactly 0, m=" + std::to_string(m));
        for (std::size_t r = 0; r + 1 < trace.p_sequence.size(); ++r) {
            const double pn = trace.p_sequence[r];
            const double pn1 = trace.p_sequence[r + 1];
            if (pn < 1e-12)
                break;
            f.expect(pn1 <= 4.0 * m * pn * pn,
                     "p_{n+1}/p_n^2 unbounded at round " + std::to_string(r) +
                         ", m=" + std::to_string(m));
        }
    }
    return f.str();
}

std::string check_map_round1_coincidence() {
    Failures f;
    for (int m = 2; m <= 8; ++m) {
        for (double p : linspace_grid(0.0, 0.5, 0.05)) {
            const double from_map = purify_map::map_step(p, m);
            const auto r1 = protocol::enumerate_round1({p, m, 1});
            f.expect(std::abs((1.0 - r1.success.reduced_pair_fidelity) - from_map) <= 1e-12,
                     "map step != round-1 reduced dephasing" + at(p, m));
        }
    }
    return f.str();
}

}  // namespace

std::vector<CheckResult> run_all_checks(const Options& options) {
    using Clock = std::chrono::steady_clock;
    std::vector<std::pair<std::string, std::function<std::string()>>> registry = {
        {"core.normalization", check_core_normalization},
        {"core.branch_completeness", check_core_branch_completeness},
        {"core.mixture_identity", check_core_mixture_identity},
        {"core.monotonicity", check_core_monotonicity},
        {"core.degenerate_end", check_core_degenerate_end},
        {"densesim.round1_equivalence", check_densesim_round1_equivalence},
        {"densesim.cptp", check_densesim_cptp},
        {"densesim.x_parity", check_densesim_x_parity},
        {"densesim.bsm", check_densesim_bsm},
        {"protocol.parity_bookkeeping", check_protocol_parity_bookkeeping},
        {"protocol.closed_form_agreement", check_protocol_closed_form_agreement},
        {"protocol.conservation", check_protocol_conservation},
        {"protocol.monte_carlo", [&] { return check_protocol_monte_carlo(options); }},
        {"protocol.fidelity_ordering", check_protocol_fidelity_ordering},
        {"rates.bound_round1", [] { return check_rates_bound(1); }},
        {"rates.bound_round2", [] { return check_rates_bound(2); }},
        {"rates.mixture_entropy", check_rates_mixture_entropy},
        {"rates.bsm_equivalence", check_rates_bsm_equivalence},
        {"rates.concavity", check_rates_concavity},
        {"map.contraction", check_map_contraction},
        {"map.sandwich", check_map_sandwich},
        {"map.derivative_fd", check_map_derivative_fd},
        {"map.super_stability", check_map_super_stability},
        {"map.round1_coincidence", check_map_round1_coincidence},
    };

    std::vector<CheckResult> results;
    results.reserve(registry.size());
    for (auto& [name, fn] : registry) {
        CheckResult r;
        r.name = name;
        const auto start = Clock::now();
        try {
            r.detail = fn();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.elapsed_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace dephasim::verify
