#include "dephasim/purify_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dephasim/format.hpp"

namespace dephasim::purify_map {

namespace {

constexpr double kEarlyStop = 1e-15;

void check_domain(double p, int m) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::domain_error("map domain is p in [0, 1/2]");
    if (m < 2)
        throw std::domain_error("map needs m >= 2");
}

// Fixed-point residual in polynomial form, finite on all of [0, 1]:
// map_step(p) - p has the sign of q^(m+1) - q^(m-1) with q = 1 - 2p.
double polynomial_residual(double p, int m) {
    const double q = 1.0 - 2.0 * p;
    return std::pow(q, m + 1) - std::pow(q, m - 1);
}

}  // namespace

double reduced_state_a(double p, int m) {
    check_domain(p, m);
    const double half_q = 0.5 * (1.0 - 2.0 * p);
    return std::ldexp(std::pow(half_q, m) + std::ldexp(1.0, -m), m - 2);
}

double reduced_state_b(double p, int m) {
    check_domain(p, m);
    const double half_q = 0.5 * (1.0 - 2.0 * p);
    return std::ldexp(std::pow(half_q, m - 1) * 0.5 + half_q * std::ldexp(1.0, -(m - 1)),
                      m - 2);
}

double map_step(double p, int m) {
    check_domain(p, m);
    return 0.5 * (1.0 - reduced_state_b(p, m) / reduced_state_a(p, m));
}

MapTrace iterate_map(double p0, int m, int rounds) {
    check_domain(p0, m);
    if (rounds < 1)
        throw std::domain_error("iterate_map needs rounds >= 1");

    MapTrace trace;
    trace.m = m;
    trace.p_sequence.reserve(rounds + 1);
    trace.p_sequence.push_back(p0);
    double p = p0;
    for (int r = 1; r <= rounds; ++r) {
        if (trace.early_stop_round) {
            trace.p_sequence.push_back(0.0);
            continue;
        }
        p = map_step(p, m);
        trace.p_sequence.push_back(p);
        if (p < kEarlyStop)
            trace.early_stop_round = r;
    }
    trace.fidelity_sequence.reserve(trace.p_sequence.size());
    for (std::size_t r = 0; r < trace.p_sequence.size(); ++r) {
        const bool clamped =
            trace.early_stop_round && static_cast<int>(r) >= *trace.early_stop_round;
        trace.fidelity_sequence.push_back(clamped ? 1.0 : 1.0 - trace.p_sequence[r]);
    }
    return trace;
}

double map_derivative(double p, int m) {
    check_domain(p, m);
    if (p == 0.5)
        return m == 2 ? 2.0 : 1.0;  // analytic limit; the closed form is 0/0 here
    const double q = 1.0 - 2.0 * p;
    const double qm = std::pow(q, m);
    const double numerator =
        1.0 - std::pow(q, 2 * m) + 4.0 * p * (p - 1.0) * (1.0 - (m - 1) * qm);
    const double denominator = (1.0 + qm) * (1.0 + qm) * q * q;
    return numerator / denominator;
}

std::vector<double> fixed_points(int m) {
    if (m < 2)
        throw std::domain_error("fixed_points needs m >= 2");

    // Scan [0, 1] for sign changes and for dips of |residual| (even-order
    // roots of the polynomial form do not change sign), then refine.
    constexpr int kGrid = 4096;
    constexpr double kResidualTol = 1e-12;
    auto res = [&](double p) { return polynomial_residual(p, m); };

    std::vector<double> roots;
    auto push_root = [&](double p) {
        for (double r : roots)
            if (std::abs(r - p) < 1e-9)
                return;
        roots.push_back(p);
    };

    std::vector<double> grid(kGrid + 1), value(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) {
        grid[i] = static_cast<double>(i) / kGrid;
        value[i] = res(grid[i]);
        if (value[i] == 0.0)
            push_root(grid[i]);
    }
    for (int i = 0; i < kGrid; ++i) {
        if (value[i] == 0.0 || value[i + 1] == 0.0)
            continue;
        if (std::signbit(value[i]) != std::signbit(value[i + 1])) {
            double lo = grid[i], hi = grid[i + 1];
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (std::signbit(res(mid)) == std::signbit(res(lo)))
                    lo = mid;
                else
                    hi = mid;
            }
            push_root(0.5 * (lo + hi));
        }
    }
    // Interior minima of |residual|: ternary-search each dip.
    for (int i = 1; i < kGrid; ++i) {
        if (!(std::abs(value[i]) <= std::abs(value[i - 1]) &&
              std::abs(value[i]) <= std::abs(value[i + 1])))
            continue;
        double lo = grid[i - 1], hi = grid[i + 1];
        for (int it = 0; it < 300; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (std::abs(res(m1)) < std::abs(res(m2)))
                hi = m2;
            else
                lo = m1;
        }
        const double p = 0.5 * (lo + hi);
        if (std::abs(res(p)) < kResidualTol)
            push_root(p);
    }

    std::sort(roots.begin(), roots.end());
    return roots;
}

std::string trace_csv(const MapTrace& trace) {
    std::string out = std::string(kCsvSchemaHeader) + "\n" + "round,p,fidelity\n";
    for (std::size_t r = 0; r < trace.p_sequence.size(); ++r) {
        out += std::to_string(r);
        out += ',';
        out += fmt_double(trace.p_sequence[r]);
        out += ',';
        out += fmt_double(trace.fidelity_sequence[r]);
        out += '\n';
    }
    return out;
}

}  // namespace dephasim::purify_map
