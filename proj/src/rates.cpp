#include "dephasim/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "dephasim/core.hpp"
#include "dephasim/format.hpp"
#include "dephasim/purify_map.hpp"

namespace dephasim::rates {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Entropy of a round-1 branch evaluated from log-space class weights, so
// large m never overflows a binomial coefficient.
double round1_branch_entropy(double p, int m, StepResult branch) {
    if (p == 0.0)
        return 0.0;  // success branch is pure; failure branch never occurs
    const double q = 1.0 - 2.0 * p;
    const double qm = std::pow(q, m);
    const double prob = branch == StepResult::success ? 0.5 * (1.0 + qm) : 0.5 * (1.0 - qm);
    if (prob <= 0.0)
        return 0.0;
    const double log_p = std::log(p), log_1p = std::log(1.0 - p), log_prob = std::log(prob);
    const int first = branch == StepResult::success ? 0 : 1;
    double entropy = 0.0;
    for (int j = first; j <= m; j += 2) {
        const double log_raw = (m - j) * log_1p + j * log_p;
        const double mass = std::exp(core::log_binomial(m, j) + log_raw) / prob;
        if (mass == 0.0)
            continue;
        entropy -= mass * (log_raw - log_prob) / kLn2;
    }
    return entropy;
}

double round1_probability(double p, int m, StepResult branch) {
    const double qm = std::pow(1.0 - 2.0 * p, m);
    return branch == StepResult::success ? 0.5 * (1.0 + qm) : 0.5 * (1.0 - qm);
}

}  // namespace

double entropy_of_spectrum(const Spectrum& spectrum) {
    if (!spectrum.is_normalized(1e-9))
        throw std::invalid_argument("entropy_of_spectrum needs a normalized spectrum (got " +
                                    std::to_string(spectrum.total_weight()) + ")");
    double entropy = 0.0;
    for (const auto& e : spectrum.entries) {
        if (e.value <= 0.0)
            continue;
        entropy -= static_cast<double>(e.multiplicity) * e.value * std::log2(e.value);
    }
    return entropy;
}

RoundLedger rci_round1(const DephasingParams& params) {
    params.validate();
    const int m = params.m;
    const double dim = m - 1;

    RoundLedger ledger;
    ledger.round = 1;
    ledger.p = params.p;
    ledger.m = m;
    ledger.capacity = core::capacity(params.p);
    ledger.lower_bound = (dim / m) * ledger.capacity;

    double weighted_entropy = 0.0;
    for (StepResult r : {StepResult::success, StepResult::failure}) {
        BranchLedgerEntry e;
        e.tag = r == StepResult::success ? BranchTag::s1() : BranchTag::f1();
        e.probability = round1_probability(params.p, m, r);
        e.entropy = round1_branch_entropy(params.p, m, r);
        e.alice_log2_dim = dim;
        e.rci = dim - e.entropy;
        weighted_entropy += e.probability * e.entropy;
        ledger.branches.push_back(e);
    }
    ledger.average_rci = (dim - weighted_entropy) / m;
    return ledger;
}

RoundLedger rci_round2(const DephasingParams& params) {
    params.validate();
    const int m = params.m;
    const double dim = static_cast<double>(m - 1) * (m - 1);

    RoundLedger ledger;
    ledger.round = 2;
    ledger.p = params.p;
    ledger.m = m;
    ledger.capacity = core::capacity(params.p);
    const double ratio = (m - 1.0) / m;
    ledger.lower_bound = ratio * ratio * ledger.capacity;

    double average = 0.0;
    for (const BranchTag& tag :
         {BranchTag::s1s2(), BranchTag::s1f2(), BranchTag::f1s2(), BranchTag::f1f2()}) {
        const double p1 = round1_probability(params.p, m, tag.round1);
        const auto branch = core::round2_spectrum(params, tag);

        BranchLedgerEntry e;
        e.tag = tag;
        e.probability = p1 * branch.probability;
        e.entropy =
            branch.spectrum.entries.empty() ? 0.0 : entropy_of_spectrum(branch.spectrum);
        e.alice_log2_dim = dim;
        e.rci = dim - e.entropy;
        average += e.probability * e.rci;
        ledger.branches.push_back(e);
    }
    ledger.average_rci = average / (static_cast<double>(m) * m);
    return ledger;
}

std::pair<double, double> rci_bound(const DephasingParams& params, int rounds) {
    params.validate();
    if (rounds < 1)
        throw std::domain_error("rci_bound needs rounds >= 1");
    const double c = core::capacity(params.p);
    const double ratio = std::pow(1.0 - 1.0 / params.m, rounds);
    return {ratio * c, c};
}

AlternativeComparison alternative_vs_actual_rci(const DephasingParams& params, int round) {
    params.validate();
    if (round != 1 && round != 2)
        throw std::domain_error("alternative_vs_actual_rci covers rounds 1 and 2");

    const int m = params.m;
    AlternativeComparison out;
    out.round = round;

    double p_reduced = purify_map::map_step(params.p, m);
    double dim = m - 1;
    double entropy = 0.0;
    if (round == 1) {
        entropy = round1_branch_entropy(params.p, m, StepResult::success);
    } else {
        p_reduced = purify_map::map_step(p_reduced, m);
        dim = static_cast<double>(m - 1) * (m - 1);
        const auto branch = core::round2_spectrum(params, BranchTag::s1s2());
        entropy = branch.spectrum.entries.empty() ? 0.0 : entropy_of_spectrum(branch.spectrum);
    }
    out.alternative_rci = dim * (1.0 - core::binary_entropy(p_reduced));
    out.actual_rci = dim - entropy;
    out.difference = out.actual_rci - out.alternative_rci;
    return out;
}

std::string ledger_csv_header() {
    return std::string(kCsvSchemaHeader) +
           "\np,m,n,branch,probability,entropy,rci,avg_rci,lower_bound,capacity\n";
}

std::string ledger_csv_rows(const RoundLedger& ledger) {
    std::string out;
    const std::string prefix = fmt_double(ledger.p) + "," + std::to_string(ledger.m) + "," +
                               std::to_string(ledger.round) + ",";
    for (const auto& b : ledger.branches) {
        out += prefix + b.tag.name() + "," + fmt_double(b.probability) + "," +
               fmt_double(b.entropy) + "," + fmt_double(b.rci) + ",,,\n";
    }
    out += prefix + "average,1,,," + fmt_double(ledger.average_rci) + "," +
           fmt_double(ledger.lower_bound) + "," + fmt_double(ledger.capacity) + "\n";
    return out;
}

std::string ledger_csv(const RoundLedger& ledger) {
    return ledger_csv_header() + ledger_csv_rows(ledger);
}

}  // namespace dephasim::rates
