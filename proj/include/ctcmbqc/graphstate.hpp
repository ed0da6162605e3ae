#pragma once

// Open graphs with local-Clifford decorations, local complementation,
// Z-deletion and the Pauli-measurement elimination pipeline that simplifies
// translated BSS patterns.
//
// Decorations track the frame change: if D is the decoration map, the current
// graph state equals D applied to the original-frame state. A measurement
// specified in the original frame by basis vector |b> is therefore performed on
// the current graph in basis D|b>.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/pattern.hpp"
#include "ctcmbqc/pauli.hpp"

namespace ctcmbqc {

class OpenGraph {
   public:
    OpenGraph() = default;
    OpenGraph(std::set<int> vertices, std::set<std::pair<int, int>> edges, std::vector<int> inputs,
              std::vector<int> outputs);

    const std::set<int> &vertices() const noexcept { return vertices_; }
    /// Stored as (min, max).
    const std::set<std::pair<int, int>> &edges() const noexcept { return edges_; }
    const std::vector<int> &inputs() const noexcept { return inputs_; }
    const std::vector<int> &outputs() const noexcept { return outputs_; }
    const std::map<int, LocalClifford> &decorations() const noexcept { return decorations_; }

    bool has_vertex(int v) const { return vertices_.count(v) > 0; }
    bool has_edge(int a, int b) const;
    std::set<int> neighbors(int v) const;
    bool is_input(int v) const;
    bool is_output(int v) const;
    /// Identity when the vertex carries no decoration.
    LocalClifford decoration(int v) const;
    /// Every decoration is the identity.
    bool undecorated() const;

    void toggle_edge(int a, int b);
    void remove_vertex(int v);
    /// D_v <- u D_v (u applied after the current decoration).
    void decorate(int v, const LocalClifford &u);

    /// prod_{edges} CZ on |payload>_inputs (x) |+>_rest, over vertices in
    /// ascending order. `payload` is over the inputs in listed order.
    Vector graph_state(const Vector &payload) const;
    /// Graph state with the decorations undone (the original-frame state).
    Vector frame_state(const Vector &payload) const;

   private:
    std::set<int> vertices_;
    std::set<std::pair<int, int>> edges_;
    std::vector<int> inputs_;
    std::vector<int> outputs_;
    std::map<int, LocalClifford> decorations_;
};

/// Local complementation at v: the edges inside N(v) are complemented and the
/// decorations pick up C on v and S^dagger on each neighbor, so that
/// |G_new> = C_v prod S^dagger_u |G_old>. Throws InputVertex for inputs.
OpenGraph local_complement(const OpenGraph &g, int v);

/// Matrix of C_v prod_{u in N(v)} S^dagger_u over the vertices of g.
Matrix lc_unitary(const OpenGraph &g, int v);

/// Removes v after a Z measurement in the current frame. Outcome 1 applies Z
/// to the former neighbors, which is folded into their decorations.
OpenGraph z_delete(const OpenGraph &g, int v, int outcome = 0);

enum class PlanBasis { X, Y, Z, Theta };

/// One measured vertex of the plan, in the original frame.
struct PlanEntry {
    int vertex = 0;
    PlanBasis basis = PlanBasis::Theta;
    /// Angle for XY-plane measurements (X and Y included: 0, pi, +-pi/2).
    double theta = 0.0;
    /// Corrections executed right before this measurement.
    std::vector<Command> pre;

    /// Original-frame basis vector for the given outcome.
    Vector basis_vector(int outcome) const;
};

struct MeasurementPlan {
    /// Measurement order.
    std::vector<PlanEntry> entries;
    /// Corrections on outputs, after all measurements.
    std::vector<Command> tail;

    const PlanEntry *find(int vertex) const;
};

/// Graph file: "vertex 1..5", "edge 3 4", "input 3", "output 4",
/// "measure 1 X", "measure 3 theta=0.3".
std::pair<OpenGraph, MeasurementPlan> parse_graph(const std::string &text);
std::string format_graph(const OpenGraph &g, const MeasurementPlan &plan);

/// Graph and plan of a pattern (standardized and canonicalized first).
std::pair<OpenGraph, MeasurementPlan> pattern_to_open_graph(const Pattern &p);

/// Pattern with the decorations folded into measurement angles and
/// corrections. Commands depending on vertices absent from the graph are
/// dropped. Throws VerificationFailed on a decorated output or a measurement
/// that leaves the XY plane.
Pattern emit_pattern(const OpenGraph &g, const MeasurementPlan &plan);

/// Map of the decorated graph under the plan, computed from the frame state.
ProcessMap decorated_map(const OpenGraph &g, const MeasurementPlan &plan);

struct RewriteStep {
    enum class Op { LC, ZDEL, DROP };
    Op op = Op::LC;
    int vertex = 0;
    /// Probability of the kept outcome; 1 for LC.
    double probability = 1.0;

    std::string to_string() const;
    bool operator==(const RewriteStep &) const = default;
};

struct Elimination {
    OpenGraph graph;
    MeasurementPlan plan;
    std::vector<RewriteStep> log;
    /// Vertices removed along outcome 0 of their original-frame measurement.
    std::vector<int> eliminated;
};

/// Greedy elimination of X/Y/Z-measured vertices, lowest vertex first:
/// Z-type vertices are deleted, isolated ones dropped, Y-type ones
/// complemented, and X-type ones complemented at their lowest non-input,
/// non-output neighbor. Input vertices and vertices with corrections from
/// other signals are left in place. Every step is checked against the
/// original plan postselected on the eliminated outcomes.
Elimination eliminate_pauli_measurements(const OpenGraph &g, const MeasurementPlan &plan);

struct CtcSimulation {
    /// circuit_to_pattern of the plus-form circuit, standardized.
    Pattern translated;
    /// After Pauli elimination and emission; may keep anachronical corrections,
    /// which are then consistent under assume-run-filter semantics.
    Pattern pattern;
    std::vector<RewriteStep> log;
    /// Every input succeeds with the same probability and all consistent
    /// branches implement the same map.
    bool deterministic = false;
    /// Renormalized Choi distance between `pattern` and the BSS circuit.
    double map_distance = 0.0;
    /// `pattern` with its anachronical corrections removed by stabilizer
    /// rewrites, when the greedy search succeeds.
    std::optional<Pattern> time_respecting_pattern;
    std::vector<StabilizerOp> rewrites;
};

/// Full pipeline: plus form, translation, standardization, Pauli elimination
/// and emission, then a greedy search for stabilizer rewrites that remove the
/// remaining anachronical corrections.
CtcSimulation deterministic_ctc_simulation(const Circuit &bss);

}  // namespace ctcmbqc
