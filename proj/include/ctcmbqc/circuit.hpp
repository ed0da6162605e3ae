#pragma once

// Time-ordered circuit IR with |+>/|0> preparations, single-qubit and Bell
// measurements (optionally postselected), classically controlled gates whose
// control may point backwards in time, and CTC wire declarations.
//
// Signals are named by the qubit they measure: measuring qubit q defines s_q.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ctcmbqc/qmath.hpp"

namespace ctcmbqc {

enum class GateKind { J, CZ, CX, H, X, Y, Z, S, Sdag, C, Cdag, SWAP, U };

const char *gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string &name);
int gate_arity(GateKind kind);

struct ClassicalControl {
    int signal = 0;
    /// True when the controlling measurement happens later than the gate.
    bool anachronical = false;

    bool operator==(const ClassicalControl &) const = default;
};

struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> targets;
    /// J angle in radians.
    double theta = 0.0;
    /// Only for U.
    Matrix matrix;
    std::optional<ClassicalControl> control;

    static Gate j(int q, double theta);
    static Gate cz(int a, int b);
    static Gate cx(int control, int target);
    static Gate single(GateKind kind, int q);
    static Gate swap(int a, int b);
    static Gate unitary(Matrix m, std::vector<int> targets);
    Gate controlled_by(int signal, bool anachronical) const;

    /// 2^k x 2^k matrix, first target most significant.
    Matrix unitary_matrix() const;
};

enum class MeasureBasis { Z, X, Theta };

struct Measurement {
    int qubit = 0;
    MeasureBasis basis = MeasureBasis::Z;
    double theta = 0.0;
    std::optional<int> postselect;

    /// Basis vector selected by outcome s; theta outcome 0 is |+_theta>.
    Vector basis_vector(int outcome) const;
};

/// Prepares |beta_00> on (first, second), both fresh.
struct BellPrep {
    int first = 0;
    int second = 0;
};

/// Projects (first, second) onto |beta_xy> with 2x+y = postselect.
struct BellMeasurement {
    int first = 0;
    int second = 0;
    int postselect = 0;
};

using Event = std::variant<Gate, Measurement, BellPrep, BellMeasurement>;

enum class PrepState { Zero, Plus };

struct Prep {
    int qubit = 0;
    PrepState state = PrepState::Plus;
};

/// The state of `exit_qubit` right after event `exit` is sent back and
/// becomes the state of `reentry_qubit` right before event `reentry`.
struct CtcWire {
    std::size_t exit = 0;
    std::size_t reentry = 0;
    int exit_qubit = 0;
    int reentry_qubit = 0;
};

struct ClassicalEdge {
    std::size_t source = 0;  // measurement event
    std::size_t target = 0;  // gate event
    bool anachronical = false;
};

/// Validated circuit. Qubits with no preparation, no Bell preparation and no
/// CTC reentry are inputs; qubits never measured (and not sent back through a
/// CTC) are outputs. Both lists are in ascending order.
class Circuit {
   public:
    Circuit() = default;
    Circuit(int num_qubits, std::vector<Prep> preps, std::vector<Event> timeline, std::vector<CtcWire> ctc_wires = {});

    int num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Prep> &preps() const noexcept { return preps_; }
    const std::vector<Event> &timeline() const noexcept { return timeline_; }
    const std::vector<CtcWire> &ctc_wires() const noexcept { return ctc_wires_; }

    const std::vector<int> &input_qubits() const noexcept { return inputs_; }
    const std::vector<int> &output_qubits() const noexcept { return outputs_; }
    /// Signals defined by single-qubit measurements, ascending.
    const std::vector<int> &signals() const noexcept { return signals_; }
    std::vector<ClassicalEdge> classical_edges() const;
    /// Signals consumed by some gate before they are measured.
    std::vector<int> anachronical_signals() const;
    bool is_anachronical() const;
    bool has_bell_elements() const;
    /// Event index of the measurement defining `signal`.
    std::size_t measurement_event(int signal) const;

   private:
    void validate();

    int num_qubits_ = 0;
    std::vector<Prep> preps_;
    std::vector<Event> timeline_;
    std::vector<CtcWire> ctc_wires_;
    std::vector<int> inputs_;
    std::vector<int> outputs_;
    std::vector<int> signals_;
};

Circuit parse_circuit(const std::string &text);
std::string serialize_circuit(const Circuit &circuit);

struct Branch {
    /// (signal, value) for every measured signal, ascending by signal.
    std::vector<std::pair<int, int>> outcomes;
    /// Subnormalized output state over the output qubits.
    StateVector state;
    double probability = 0.0;
};

struct BranchSet {
    std::vector<int> output_qubits;
    /// Sorted lexicographically by outcome values, 0 before 1.
    std::vector<Branch> branches;

    double total_probability() const;
};

/// Branch enumeration. Throws RequiresConsistencySemantics on anachronical
/// controls or CTC wires.
BranchSet simulate(const Circuit &circuit, const StateVector &input);

/// Assume-run-filter over anachronically consumed signals; CTC wires are first
/// replaced by their postselected-teleportation form.
BranchSet simulate_consistent(const Circuit &circuit, const StateVector &input);

/// Replaces every CTC wire by a Bell pair prepared before the reentry event and
/// a |beta_00> postselection after the exit event. Partners are appended as new
/// qubits.
Circuit resolve_ctc_wires(const Circuit &circuit);

struct ProcessMap {
    /// Sum of all consistent branches (subnormalized).
    ChoiMatrix choi;
    /// False when renormalized branch maps differ.
    bool deterministic = true;
    std::vector<ChoiMatrix> branch_maps;
};

/// Input-output map from basis propagation. `inputs` must list the circuit's
/// input qubits (any order); `outputs` may be any subset of its outputs, the
/// rest being traced out.
ProcessMap postselected_map(const Circuit &circuit, const std::vector<int> &inputs, const std::vector<int> &outputs);
ProcessMap postselected_map(const Circuit &circuit);

/// Bell elements become |+> preparations, CZ, H and X-basis postselections, and
/// every named gate is expanded into J/CZ macros. A circuit without Bell
/// elements or CTC wires is returned unchanged; CTC wires are resolved first.
Circuit rewrite_to_plus_form(const Circuit &circuit);

/// J/CZ macro for a named gate, in application order. Throws UnsupportedGate
/// for U.
std::vector<Gate> expand_to_j_cz(const Gate &gate);

}  // namespace ctcmbqc
