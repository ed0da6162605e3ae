#pragma once

// The two CTC semantics: BSS (teleportation with |beta_00> postselection) and
// Deutsch (self-consistent fixed point of the CTC channel), and their
// comparison.
//
// V acts on 2k qubits: the first k are the chronology-respecting wires B, the
// last k the CTC slot C. After V, B' travels back in time and C' continues as
// the chronology-respecting output. Deutsch's unitary on (CTC (x) register) is
// then U = V SWAP.

#include <optional>
#include <string>
#include <vector>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/qmath.hpp"

namespace ctcmbqc {

inline constexpr int kMaxCtcQubits = 2;

/// Larger register around V: preparations and gates before/after V, with V's
/// B wires placed on `v_wires`.
struct CtcEmbedding {
    int qubits = 0;
    std::vector<Prep> preps;
    std::vector<Gate> before;
    std::vector<Gate> after;
    std::vector<int> v_wires;
};

class CtcSpec {
   public:
    CtcSpec() = default;
    /// V given as a gate list on qubits 1..2k.
    CtcSpec(int ctc_qubits, std::vector<Gate> v_gates, std::optional<CtcEmbedding> embedding = std::nullopt);
    /// V given as a matrix.
    CtcSpec(int ctc_qubits, Matrix v, std::optional<CtcEmbedding> embedding = std::nullopt);

    int ctc_qubits() const noexcept { return k_; }
    const Matrix &v() const noexcept { return v_; }
    /// Empty when V was given as a matrix.
    const std::vector<Gate> &v_gates() const noexcept { return v_gates_; }
    bool v_is_circuit() const noexcept { return v_is_circuit_; }
    /// The explicit embedding, or the trivial one (k register wires, V on all).
    const CtcEmbedding &embedding() const noexcept { return embedding_; }
    bool embedded() const noexcept { return embedded_; }
    /// Unprepared register wires, ascending.
    std::vector<int> register_inputs() const;

   private:
    void validate();

    int k_ = 1;
    Matrix v_;
    std::vector<Gate> v_gates_;
    CtcEmbedding embedding_;
    bool embedded_ = false;
    bool v_is_circuit_ = false;
};

CtcSpec parse_ctc_spec(const std::string &text);
std::string serialize_ctc_spec(const CtcSpec &spec);

/// Qubit layout: partners 1..k, CTC slots k+1..2k, register 2k+1..2k+N.
/// Each slot is Bell-paired with its partner; after V, each B' wire is
/// Bell-measured with the partner and postselected on |beta_00>.
Circuit build_bss_circuit(const CtcSpec &spec);

struct BssResult {
    double success_probability = 0.0;
    /// Subnormalized output over the register wires in register order.
    StateVector raw_state;
    /// Normalized output; empty on a grandfather paradox.
    std::optional<StateVector> output_state;
    bool grandfather_paradox = false;
};

inline constexpr double kGrandfatherThreshold = 1e-12;

BssResult bss_simulate(const CtcSpec &spec, const StateVector &input);

/// Deutsch unitary on (CTC(k) (x) register(N)):
/// after * SWAP(ctc, v_wires) * V(v_wires, ctc) * before.
Matrix deutsch_unitary(const CtcSpec &spec);

/// Full register state: rho_in on the unprepared wires, preparations elsewhere.
Matrix register_state(const CtcSpec &spec, const DensityMatrix &rho_in);

/// Phi(rho) = Tr_register[U (rho (x) rho_reg) U^dagger] as a 4^k x 4^k matrix on
/// row-major vectorized operators.
Matrix deutsch_superoperator(const CtcSpec &spec, const DensityMatrix &rho_in);

/// Real Pauli transfer matrix R_ab = Tr(P_a Phi(P_b)) / 2^k (P_0 = I).
Eigen::MatrixXd pauli_transfer_matrix(const Matrix &superop, int k);

/// k-qubit Pauli basis in index order (I, X, Y, Z per qubit, qubit 1 first).
std::vector<Matrix> pauli_basis(int k);

struct DeutschSolution {
    DensityMatrix rho_in;
    /// Hermitian traceless directions spanning the fixed-point family.
    std::vector<Matrix> fixed_point_basis;
    /// Cesaro limit from the maximally mixed state.
    DensityMatrix canonical_rho_ctc;
    /// Register output for the canonical solution.
    DensityMatrix canonical_rho_out;
    /// Boundary points of the family along +-basis directions (at most 8).
    std::vector<DensityMatrix> extremal_rho_ctc;
    std::vector<DensityMatrix> extremal_rho_out;
    /// Doubling Cesaro iteration agrees with the spectral projector.
    bool converged = false;
    double cesaro_residual = 0.0;

    int family_dimension() const { return static_cast<int>(fixed_point_basis.size()); }
};

DeutschSolution deutsch_fixed_points(const CtcSpec &spec, const DensityMatrix &rho_in);

/// Register output Tr_ctc[U (rho_ctc (x) rho_reg) U^dagger].
DensityMatrix deutsch_output(const CtcSpec &spec, const DensityMatrix &rho_ctc, const DensityMatrix &rho_in);

/// || rho - Phi(rho) ||_1.
double fixed_point_residual(const Matrix &superop, const Matrix &rho);

struct ConflictRow {
    BlochVector input_bloch;
    double bss_p = 0.0;
    bool grandfather = false;
    double trace_distance = 0.0;
    double bss_purity = 0.0;
    double deutsch_purity = 0.0;
    bool agree = false;
    /// Single-qubit outputs only; zero otherwise.
    BlochVector bss_bloch;
    BlochVector deutsch_bloch;
};

struct ConflictReport {
    std::vector<ConflictRow> rows;
    /// Row indices where the models agree (grandfather rows excluded).
    std::vector<std::size_t> agreement;
};

/// One row per input, in grid order. Inputs are single-register-qubit states.
ConflictReport compare_models(const CtcSpec &spec, const std::vector<DensityMatrix> &grid, double tol = 1e-9);

/// Two poles plus polar angles i*pi/7 (i = 1..6) times longitudes 2*pi*j/10.
std::vector<BlochVector> bloch_grid62();

/// Replaces every anachronically consumed signal by a CTC wire: the measured
/// wire is sent back from just before its measurement to a fresh qubit that
/// coherently controls the former consumers and ends as an output.
Circuit extract_ctc(const Circuit &anachronical);

}  // namespace ctcmbqc
