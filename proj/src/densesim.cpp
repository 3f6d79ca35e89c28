#include "dephasim/densesim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dephasim/core.hpp"
#include "dephasim/format.hpp"

namespace dephasim::densesim {

namespace {

using Complex = std::complex<double>;

constexpr int kMaxPairs = 6;  // 12 qubits; beyond this the enumeration engine takes over

void check_pair(const DenseState& state, int pair) {
    if (pair < 0 || 2 * pair + 1 >= state.qubits)
        throw std::out_of_range("pair index " + std::to_string(pair) + " out of range for " +
                                std::to_string(state.qubits) + " qubits");
}

// Scatter the bits of `reduced` into the positions not listed in `holes`
// (holes sorted ascending); hole positions stay zero.
std::uint32_t scatter_around(std::uint32_t reduced, const std::vector<int>& holes) {
    std::uint32_t out = 0;
    int src = 0;
    int hole = 0;
    for (int pos = 0; hole < static_cast<int>(holes.size()) || reduced >> src; ++pos) {
        if (hole < static_cast<int>(holes.size()) && holes[hole] == pos) {
            ++hole;
            continue;
        }
        out |= ((reduced >> src) & 1u) << pos;
        ++src;
    }
    return out;
}

// rho -> (1-p) rho + p Z_q rho Z_q; conjugation by Z only flips signs.
void dephase_qubit(Matrix& rho, int q, double p) {
    if (p == 0.0)
        return;
    const int dim = static_cast<int>(rho.rows());
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const int sign = ((i >> q) ^ (j >> q)) & 1;
            if (sign)
                rho(i, j) *= 1.0 - 2.0 * p;
        }
    }
}

void apply_cnot_qubits(Matrix& rho, int control, int target) {
    const int dim = static_cast<int>(rho.rows());
    Matrix out(dim, dim);
    auto permute = [&](int i) {
        return ((i >> control) & 1) ? i ^ (1 << target) : i;
    };
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            out(permute(i), permute(j)) = rho(i, j);
    rho.swap(out);
}

// Projects qubits (qa, qb) onto the unit vector v (indexed bit_qa + 2*bit_qb)
// and traces them out. Returns the branch probability and the unnormalized
// reduced matrix.
std::pair<double, DenseState> project_pair(const DenseState& state, int qa, int qb,
                                           const std::array<Complex, 4>& v) {
    if (qa > qb)
        throw std::logic_error("project_pair expects qa < qb");
    const int rdim = state.dim() >> 2;
    std::vector<std::uint32_t> base(rdim);
    const std::vector<int> holes{qa, qb};
    for (int r = 0; r < rdim; ++r)
        base[r] = scatter_around(static_cast<std::uint32_t>(r), holes);

    DenseState reduced;
    reduced.qubits = state.qubits - 2;
    reduced.rho = Matrix::Zero(rdim, rdim);
    for (int r = 0; r < rdim; ++r) {
        for (int c = 0; c < rdim; ++c) {
            Complex acc = 0.0;
            for (int a = 0; a < 4; ++a) {
                if (v[a] == Complex(0.0))
                    continue;
                const std::uint32_t i =
                    base[r] | ((a & 1u) << qa) | (((a >> 1) & 1u) << qb);
                for (int b = 0; b < 4; ++b) {
                    if (v[b] == Complex(0.0))
                        continue;
                    const std::uint32_t j =
                        base[c] | ((b & 1u) << qa) | (((b >> 1) & 1u) << qb);
                    acc += std::conj(v[a]) * v[b] * state.rho(i, j);
                }
            }
            reduced.rho(r, c) = acc;
        }
    }
    const double prob = reduced.rho.trace().real();
    return {prob, std::move(reduced)};
}

MeasurementBranch make_branch(std::string outcome, double prob, DenseState&& unnormalized) {
    MeasurementBranch b;
    b.outcome = std::move(outcome);
    b.probability = prob;
    b.post_state = std::move(unnormalized);
    if (prob > 0.0)
        b.post_state.rho /= prob;
    return b;
}

}  // namespace

bool DenseState::is_hermitian(double tol) const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::vector<double> DenseState::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double DenseState::entropy() const {
    double s = 0.0;
    for (double lambda : eigenvalues()) {
        if (lambda > 1e-15)
            s -= lambda * std::log2(lambda);
    }
    return s;
}

DenseState prepare_bell_product(const std::vector<bool>& phase_flags) {
    const int pairs = static_cast<int>(phase_flags.size());
    if (pairs < 1 || pairs > kMaxPairs)
        throw std::domain_error("prepare_bell_product supports 1..6 pairs");

    const int dim = 1 << (2 * pairs);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    const double amp = std::pow(0.5, 0.5 * pairs);
    for (int i = 0; i < dim; ++i) {
        double sign = 1.0;
        bool nonzero = true;
        for (int k = 0; k < pairs && nonzero; ++k) {
            const int a = (i >> alice_qubit(k)) & 1;
            const int b = (i >> bob_qubit(k)) & 1;
            if (a != b)
                nonzero = false;
            else if (a == 1 && phase_flags[k])
                sign = -sign;
        }
        if (nonzero)
            psi(i) = sign * amp;
    }
    DenseState state;
    state.qubits = 2 * pairs;
    state.rho = psi * psi.adjoint();
    return state;
}

DenseState prepare_and_dephase(int pair_count, double p) {
    if (pair_count < 1 || pair_count > kMaxPairs)
        throw std::domain_error("prepare_and_dephase supports 1..6 pairs");
    if (!(p >= 0.0 && p <= 0.5))
        throw std::domain_error("dephasing probability must lie in [0, 1/2]");

    DenseState state = prepare_bell_product(std::vector<bool>(pair_count, false));
    for (int k = 0; k < pair_count; ++k)
        dephase_qubit(state.rho, bob_qubit(k), p);
    return state;
}

DenseState apply_circuit(const DenseState& state, const std::vector<PairCnot>& gates) {
    DenseState out = state;
    for (const auto& g : gates) {
        check_pair(out, g.control_pair);
        check_pair(out, g.target_pair);
        if (g.control_pair == g.target_pair)
            throw std::invalid_argument("CNOT control and target pair coincide");
        apply_cnot_qubits(out.rho, alice_qubit(g.control_pair), alice_qubit(g.target_pair));
        apply_cnot_qubits(out.rho, bob_qubit(g.control_pair), bob_qubit(g.target_pair));
    }
    return out;
}

std::vector<PairCnot> round1_circuit(int pair_count) {
    std::vector<PairCnot> gates;
    for (int t = 0; t < pair_count - 1; ++t)
        gates.push_back({pair_count - 1, t});
    return gates;
}

std::vector<MeasurementBranch> measure_pair_x(const DenseState& state, int pair) {
    check_pair(state, pair);
    const int qa = alice_qubit(pair), qb = bob_qubit(pair);

    std::vector<MeasurementBranch> branches;
    const char* names[4] = {"++", "-+", "+-", "--"};  // indexed by (sa, sb) bits
    for (int sb = 0; sb < 2; ++sb) {
        for (int sa = 0; sa < 2; ++sa) {
            const double va = sa ? -0.5 : 0.5, vb = sb ? -0.5 : 0.5;
            // |s_a s_b> in the X basis: amplitude (+-1)/2 per computational state
            const std::array<Complex, 4> v{0.5, va, vb, va * vb * 2.0};
            auto [prob, reduced] = project_pair(state, qa, qb, v);
            branches.push_back(make_branch(names[sa + 2 * sb], prob, std::move(reduced)));
        }
    }
    std::swap(branches[1], branches[2]);  // order ++, +-, -+, --
    return branches;
}

PooledMeasurement pool_x_outcomes(const std::vector<MeasurementBranch>& branches) {
    if (branches.size() != 4)
        throw std::invalid_argument("pool_x_outcomes expects the four X-basis branches");
    auto pool = [&](int i, int j, std::string name) {
        const double prob = branches[i].probability + branches[j].probability;
        MeasurementBranch out;
        out.outcome = std::move(name);
        out.probability = prob;
        out.post_state.qubits = branches[i].post_state.qubits;
        if (prob > 0.0) {
            out.post_state.rho = (branches[i].probability * branches[i].post_state.rho +
                                  branches[j].probability * branches[j].post_state.rho) /
                                 prob;
        } else {
            out.post_state.rho = Matrix::Zero(branches[i].post_state.dim(),
                                              branches[i].post_state.dim());
        }
        return out;
    };
    return {pool(0, 3, "success"), pool(1, 2, "failure")};
}

BsmResult bsm_swap(double p) {
    if (!(p >= 0.0 && p <= 0.5))
        throw std::domain_error("dephasing probability must lie in [0, 1/2]");
    const double pe = core::node_dephasing(p, 2);

    // Qubit layout (A, C1, C2, B): Alice keeps A and sends C1, Bob keeps B
    // and sends C2, each through half the channel.
    DenseState pair = prepare_bell_product({false});
    Matrix rho_ac = pair.rho;
    dephase_qubit(rho_ac, 1, pe);
    Matrix rho_cb = pair.rho;
    dephase_qubit(rho_cb, 0, pe);

    DenseState joint;
    joint.qubits = 4;
    joint.rho = Matrix::Zero(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            joint.rho(i, j) = rho_ac(i & 3, j & 3) * rho_cb(i >> 2, j >> 2);

    const double s = std::sqrt(0.5);
    const std::array<std::array<Complex, 4>, 4> bells{{
        {s, 0.0, 0.0, s},    // phi+
        {s, 0.0, 0.0, -s},   // phi-
        {0.0, s, s, 0.0},    // psi+
        {0.0, s, -s, 0.0},   // psi-
    }};
    const char* names[4] = {"phi+", "phi-", "psi+", "psi-"};

    BsmResult result;
    for (int b = 0; b < 4; ++b) {
        auto [prob, reduced] = project_pair(joint, 1, 2, bells[b]);
        auto branch = make_branch(names[b], prob, std::move(reduced));
        if (prob > 0.0) {
            const double s_a = partial_trace_keep(branch.post_state, {0}).entropy();
            result.average_rci += prob * (s_a - branch.post_state.entropy());
        }
        result.branches.push_back(std::move(branch));
    }
    return result;
}

double fidelity_phi_plus(const DenseState& state, int pair) {
    check_pair(state, pair);
    DenseState reduced = partial_trace_keep(state, {alice_qubit(pair), bob_qubit(pair)});
    const auto& r = reduced.rho;
    return 0.5 * (r(0, 0) + r(0, 3) + r(3, 0) + r(3, 3)).real();
}

DenseState partial_trace_keep(const DenseState& state, std::vector<int> keep_qubits) {
    std::sort(keep_qubits.begin(), keep_qubits.end());
    for (int q : keep_qubits)
        if (q < 0 || q >= state.qubits)
            throw std::out_of_range("partial_trace_keep qubit out of range");

    const int k = static_cast<int>(keep_qubits.size());
    std::vector<int> traced;
    for (int q = 0; q < state.qubits; ++q)
        if (!std::binary_search(keep_qubits.begin(), keep_qubits.end(), q))
            traced.push_back(q);

    const int kdim = 1 << k;
    const int tdim = 1 << (state.qubits - k);
    std::vector<std::uint32_t> kept_bits(kdim, 0), traced_bits(tdim, 0);
    for (int r = 0; r < kdim; ++r)
        for (int b = 0; b < k; ++b)
            kept_bits[r] |= ((r >> b) & 1u) << keep_qubits[b];
    for (int t = 0; t < tdim; ++t)
        for (int b = 0; b < static_cast<int>(traced.size()); ++b)
            traced_bits[t] |= ((t >> b) & 1u) << traced[b];

    DenseState out;
    out.qubits = k;
    out.rho = Matrix::Zero(kdim, kdim);
    for (int r = 0; r < kdim; ++r)
        for (int c = 0; c < kdim; ++c) {
            Complex acc = 0.0;
            for (int t = 0; t < tdim; ++t)
                acc += state.rho(kept_bits[r] | traced_bits[t], kept_bits[c] | traced_bits[t]);
            out.rho(r, c) = acc;
        }
    return out;
}

std::string matrix_csv(const DenseState& state) {
    std::string out = std::string(kCsvSchemaHeader) + "\n";
    for (int i = 0; i < state.dim(); ++i) {
        for (int j = 0; j < state.dim(); ++j) {
            if (j)
                out += ',';
            out += fmt_double(state.rho(i, j).real());
            out += ',';
            out += fmt_double(state.rho(i, j).imag());
        }
        out += '\n';
    }
    return out;
}

}  // namespace dephasim::densesim
