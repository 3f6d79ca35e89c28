#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dephasim::purify_map {

// Trace of the one-dimensional dephasing map: p_sequence[r] is the
// dephasing probability after r rounds (index 0 holds the input), and the
// fidelity sequence is 1 - p throughout.
struct MapTrace {
    int m = 2;
    std::vector<double> p_sequence;
    std::vector<double> fidelity_sequence;
    // Round at which iteration stopped because p dropped below 1e-15; the
    // remaining entries are clamped to p = 0, F = 1.
    std::optional<int> early_stop_round;
};

// Off-diagonal bookkeeping of the reduced success pair after one round on
// m pairs. The new dephasing probability is (1 - b/a)/2.
double reduced_state_a(double p, int m);
double reduced_state_b(double p, int m);

// One round of the reduced-state protocol: the dephasing probability a
// surviving pair carries after purifying m i.i.d. pairs of parameter p.
double map_step(double p, int m);

MapTrace iterate_map(double p0, int m, int rounds);

// Derivative of the map in p. Exactly 0 at p = 0 (super-stable fixed
// point). The closed form divides by (1-2p)^2, so at p = 1/2 the analytic
// limit is returned instead: 2 for m = 2, 1 for m >= 3.
double map_derivative(double p, int m);

// Roots of map_step(p) - p over [0, 1], located by scanning and bisecting
// the polynomial form of the fixed-point equation (which stays finite at
// p = 1, where the rational form for odd m becomes 0/0).
std::vector<double> fixed_points(int m);

// CSV lines (round, p, fidelity), one per round including round 0, prefixed
// with the schema header comment.
std::string trace_csv(const MapTrace& trace);

}  // namespace dephasim::purify_map
