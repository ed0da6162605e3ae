#pragma once

// Measurement-calculus patterns: N (|+> preparation), E (CZ), M (measurement
// onto |+-_theta>), and X/Z corrections conditioned on a single signal.
//
// Commands are stored in execution order. The signal of M on qubit i is s_i.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/pauli.hpp"
#include "ctcmbqc/qmath.hpp"

namespace ctcmbqc {

enum class CommandKind { N, E, M, X, Z };

struct Command {
    CommandKind kind = CommandKind::N;
    int qubit = 0;
    /// Second qubit of E.
    int other = 0;
    /// M angle in radians.
    double theta = 0.0;
    /// M in the computational basis instead of the XY plane.
    bool z_basis = false;
    /// Conditioning signal of X/Z; empty means unconditional.
    std::optional<int> dep;

    static Command n(int q);
    static Command e(int a, int b);
    static Command m(int q, double theta);
    static Command m_z(int q);
    static Command x(int q, std::optional<int> dep);
    static Command z(int q, std::optional<int> dep);

    bool is_correction() const { return kind == CommandKind::X || kind == CommandKind::Z; }
    bool acts_on(int q) const { return qubit == q || (kind == CommandKind::E && other == q); }
    bool operator==(const Command &) const = default;
};

/// One line of the pattern file format, e.g. "M 3 theta=0.3" or "X 2 dep=s1".
std::string format_command(const Command &c);
/// Measurement-calculus operator notation, e.g. "X2^{s1}" or "M3^{0.3}".
std::string format_command_operator(const Command &c);

/// Validated pattern. Inputs carry arbitrary payloads; every other qubit is
/// introduced by N. Each qubit is either measured exactly once or an output.
class Pattern {
   public:
    Pattern() = default;
    Pattern(std::vector<int> inputs, std::vector<int> outputs, std::vector<Command> commands);

    const std::vector<int> &inputs() const noexcept { return inputs_; }
    const std::vector<int> &outputs() const noexcept { return outputs_; }
    const std::vector<Command> &commands() const noexcept { return commands_; }

    /// All qubits, ascending.
    const std::vector<int> &qubits() const noexcept { return qubits_; }
    /// Measured qubits in measurement order.
    const std::vector<int> &signals() const noexcept { return signals_; }
    bool is_measured(int q) const;
    /// Position of M on `q` in the command list.
    std::size_t measurement_index(int q) const;
    /// Signals consumed by a correction placed before their measurement.
    std::vector<int> anachronical_signals() const;
    bool is_anachronical() const { return !anachronical_signals().empty(); }
    /// All N and E commands precede every M, X and Z.
    bool is_standard() const;
    /// Edges of the E commands as ordered pairs (min, max), deduplicated mod 2.
    std::vector<std::pair<int, int>> edges() const;

    /// File format (execution order).
    std::string to_string() const;
    /// Operator order (right-to-left), as the commands would be written in an
    /// equation acting on a ket.
    std::string to_operator_string() const;

   private:
    void validate();

    std::vector<int> inputs_;
    std::vector<int> outputs_;
    std::vector<Command> commands_;
    std::vector<int> qubits_;
    std::vector<int> signals_;
};

Pattern parse_pattern(const std::string &text);

/// Branch enumeration; anachronical patterns run under assume-run-filter.
/// Output states are over the pattern's outputs in their listed order; the
/// input payload is over the listed inputs in order.
/// Qubits in `postselect` have their outcome fixed (their signal takes that
/// value everywhere).
BranchSet execute(const Pattern &p, const StateVector &input, const std::map<int, int> &postselect = {});

/// Input-output map summed over consistent branches, with per-branch maps.
ProcessMap execute_map(const Pattern &p, const std::map<int, int> &postselect = {});

/// Register over p.qubits() (ascending) after preparation and entangling,
/// for the given input basis index.
using ResourceFn = std::function<Vector(std::size_t input_basis_index)>;

/// Like execute_map, but starts from a caller-supplied resource state instead
/// of replaying the N and E commands.
ProcessMap execute_map_on_resource(const Pattern &p, const ResourceFn &resource, const std::map<int, int> &postselect = {});

struct DeterminismReport {
    bool deterministic = false;
    /// Summed map, present when deterministic.
    std::optional<ChoiMatrix> map;
    /// Why the check failed; empty on success.
    std::string reason;
};

inline constexpr int kMeasurementBudget = 12;

/// Brute-force determinism check. Throws BudgetExceeded past 12 measurements.
DeterminismReport is_deterministic(const Pattern &p, std::uint64_t seed = 0);

/// K or K^{s} for a Pauli word K.
struct StabilizerOp {
    PauliString word;
    std::optional<int> signal;

    std::string to_string() const;
};

/// Graph state |G> of the pattern's N/E commands with the given basis payload
/// on the inputs (listed order), over qubits() in ascending order.
Vector resource_state(const Pattern &p, std::size_t input_basis_index);

/// True when K|G> = |G> for every input basis payload.
bool verify_stabilizer(const Pattern &p, const PauliString &word, double tol = kDefaultTol);

/// Candidate generators X_i prod_{j in N(i)} Z_j for every qubit i, keeping
/// those that verify numerically.
std::vector<StabilizerOp> stabilizers_of_resource(const Pattern &p);

/// Inserts K^{signal} right after the N/E prefix and cancels matching
/// conditional Paulis. The map is checked to be unchanged.
Pattern apply_stabilizer_rewrite(const Pattern &p, const PauliString &word, int signal);

/// Standard form: N first, then E, then the remaining commands with
/// corrections pushed right next to the measurement of their qubit (or to the
/// end for outputs), with pairs of identical corrections cancelled.
Pattern canonicalize(const Pattern &p);

/// Moves N and E commands to the front using X_i^s E_ij = E_ij X_i^s Z_j^s.
/// Throws NotStandardizable when E acts on an already measured qubit.
Pattern standardize(const Pattern &p);

/// N -> |+> prep, E -> CZ, M(i,theta) -> J(-theta) then a Z measurement placed
/// after the last coherent use of the wire. Time-respecting corrections become
/// CX/CZ controlled by the measured wire; anachronical ones become classically
/// controlled gates flagged anachronical. Qubits are relabelled 1..n in
/// ascending order when the ids are not already dense.
Circuit pattern_to_circuit(const Pattern &p);

/// Translates a {J, CZ, |+>, X/theta-measurement} circuit. Bell elements are
/// rewritten first, named gates are expanded into J/CZ macros, J(theta) on
/// wire i becomes N j; E i j; Z i^{s_i}; M i^{-theta} with the wire moving to
/// j, and a |+> postselection becomes Z i^{s_i}; M i^{0}.
Pattern circuit_to_pattern(const Circuit &c);

}  // namespace ctcmbqc
