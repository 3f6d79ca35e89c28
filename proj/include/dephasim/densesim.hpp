#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dephasim::densesim {

using Matrix = Eigen::MatrixXcd;

// Density matrix over a small qubit register. Basis index bit q is the
// state of qubit q. Bell pair i owns qubits (2i, 2i+1) = (Alice, Bob);
// every pair-indexed operation goes through alice_qubit/bob_qubit.
struct DenseState {
    int qubits = 0;
    Matrix rho;

    int dim() const { return 1 << qubits; }
    double trace() const { return rho.trace().real(); }
    bool is_hermitian(double tol = 1e-12) const;
    std::vector<double> eigenvalues() const;  // ascending
    double entropy() const;                   // von Neumann entropy, bits
};

inline int alice_qubit(int pair) { return 2 * pair; }
inline int bob_qubit(int pair) { return 2 * pair + 1; }

// Pure tensor product of Bell pairs; phase_flags[i] selects phi- over phi+.
DenseState prepare_bell_product(const std::vector<bool>& phase_flags);

// pair_count copies of phi+, each with the transmitted arm passed through
// the dephasing channel via its Kraus pair {sqrt(1-p) I, sqrt(p) Z}.
// Guarded at 6 pairs (a 2^12-dimensional matrix).
DenseState prepare_and_dephase(int pair_count, double p);

struct PairCnot {
    int control_pair = 0;
    int target_pair = 0;
};

// CNOTs applied by Alice on her arms and mirrored by Bob on his.
DenseState apply_circuit(const DenseState& state, const std::vector<PairCnot>& gates);

// The first-round circuit: the last pair controls all others.
std::vector<PairCnot> round1_circuit(int pair_count);

struct MeasurementBranch {
    std::string outcome;
    double probability = 0.0;
    DenseState post_state;  // measured qubits traced out, normalized
};

// Both arms of the pair measured in the X basis; branches ordered
// ("++", "+-", "-+", "--") and complete.
std::vector<MeasurementBranch> measure_pair_x(const DenseState& state, int pair);

struct PooledMeasurement {
    MeasurementBranch success;  // matching outcomes (++), (--)
    MeasurementBranch failure;  // mismatched (+-), (-+)
};

PooledMeasurement pool_x_outcomes(const std::vector<MeasurementBranch>& branches);

struct BsmResult {
    std::vector<MeasurementBranch> branches;  // phi+, phi-, psi+, psi-
    double average_rci = 0.0;
};

// Entanglement swapping at a mid-point node: both parties send one arm of
// a phi+ pair through half the channel, the node projects its two qubits
// onto the Bell basis. Every branch lands on a state as noisy as the
// repeaterless one, and the average RCI equals 1 - H2(p).
BsmResult bsm_swap(double p);

/// Overlap of the traced-down two-qubit state of `pair` with phi+.
double fidelity_phi_plus(const DenseState& state, int pair);

DenseState partial_trace_keep(const DenseState& state, std::vector<int> keep_qubits);

// Debug dump: row-major, each entry as adjacent "re,im" cells.
std::string matrix_csv(const DenseState& state);

}  // namespace dephasim::densesim
