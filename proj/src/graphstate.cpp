#include "ctcmbqc/graphstate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ctcmbqc/error.hpp"

namespace ctcmbqc {

// ---------------------------------------------------------------------------
// OpenGraph

namespace {

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

OpenGraph::OpenGraph(std::set<int> vertices, std::set<std::pair<int, int>> edges, std::vector<int> inputs,
                     std::vector<int> outputs)
    : vertices_(std::move(vertices)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    for (auto [a, b] : edges) {
        if (a == b) throw Error(ErrorCode::Validation, "self-loop on vertex " + std::to_string(a));
        if (!has_vertex(a) || !has_vertex(b)) {
            throw Error(ErrorCode::Validation, "edge " + std::to_string(a) + "-" + std::to_string(b) + " has an unknown endpoint");
        }
        edges_.insert(edge_key(a, b));
    }
    for (const auto *list : {&inputs_, &outputs_}) {
        std::set<int> seen;
        for (int v : *list) {
            if (!has_vertex(v)) throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " is not in the graph");
            if (!seen.insert(v).second) throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " listed twice");
        }
    }
}

bool OpenGraph::has_edge(int a, int b) const { return edges_.count(edge_key(a, b)) > 0; }

std::set<int> OpenGraph::neighbors(int v) const {
    std::set<int> out;
    for (auto [a, b] : edges_) {
        if (a == v) out.insert(b);
        if (b == v) out.insert(a);
    }
    return out;
}

bool OpenGraph::is_input(int v) const { return std::find(inputs_.begin(), inputs_.end(), v) != inputs_.end(); }
bool OpenGraph::is_output(int v) const { return std::find(outputs_.begin(), outputs_.end(), v) != outputs_.end(); }

LocalClifford OpenGraph::decoration(int v) const {
    auto it = decorations_.find(v);
    return it == decorations_.end() ? LocalClifford() : it->second;
}

bool OpenGraph::undecorated() const {
    return std::all_of(decorations_.begin(), decorations_.end(), [](const auto &kv) { return kv.second.is_identity(); });
}

void OpenGraph::toggle_edge(int a, int b) {
    auto e = edge_key(a, b);
    if (!edges_.erase(e)) edges_.insert(e);
}

void OpenGraph::remove_vertex(int v) {
    vertices_.erase(v);
    decorations_.erase(v);
    for (auto it = edges_.begin(); it != edges_.end();) {
        it = (it->first == v || it->second == v) ? edges_.erase(it) : std::next(it);
    }
}

void OpenGraph::decorate(int v, const LocalClifford &u) {
    LocalClifford next = decoration(v).then(u);
    if (next.is_identity()) {
        decorations_.erase(v);
    } else {
        decorations_[v] = next;
    }
}

namespace {

std::map<int, int> positions(const std::set<int> &vertices) {
    std::map<int, int> pos;
    int k = 1;
    for (int v : vertices) pos[v] = k++;
    return pos;
}

}  // namespace

Vector OpenGraph::graph_state(const Vector &payload) const {
    auto pos = positions(vertices_);
    const int n = static_cast<int>(vertices_.size());
    std::vector<int> in_pos;
    for (int v : inputs_) in_pos.push_back(pos.at(v));
    if (payload.size() != (Eigen::Index{1} << inputs_.size())) {
        throw Error(ErrorCode::DimensionMismatch, "payload does not match the number of inputs");
    }
    Vector state = embed_qubits(payload, n, in_pos);
    for (int v : vertices_) {
        if (is_input(v)) continue;
        const int a = pos.at(v);
        apply_operator(state, n, std::span<const int>(&a, 1), gates::h());
    }
    for (auto [a, b] : edges_) {
        int pair[2] = {pos.at(a), pos.at(b)};
        apply_operator(state, n, pair, gates::cz());
    }
    return state;
}

Vector OpenGraph::frame_state(const Vector &payload) const {
    Vector state = graph_state(payload);
    auto pos = positions(vertices_);
    const int n = static_cast<int>(vertices_.size());
    for (const auto &[v, d] : decorations_) {
        const int a = pos.at(v);
        apply_operator(state, n, std::span<const int>(&a, 1), d.matrix().adjoint());
    }
    return state;
}

OpenGraph local_complement(const OpenGraph &g, int v) {
    if (!g.has_vertex(v)) throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " is not in the graph");
    if (g.is_input(v)) throw Error(ErrorCode::InputVertex, "local complementation at input vertex " + std::to_string(v));
    OpenGraph out = g;
    auto nb = g.neighbors(v);
    std::vector<int> list(nb.begin(), nb.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (std::size_t j = i + 1; j < list.size(); ++j) out.toggle_edge(list[i], list[j]);
    }
    out.decorate(v, LocalClifford::c());
    for (int u : list) out.decorate(u, LocalClifford::sdg());
    return out;
}

Matrix lc_unitary(const OpenGraph &g, int v) {
    auto pos = positions(g.vertices());
    const int n = static_cast<int>(g.vertices().size());
    const int a = pos.at(v);
    Matrix u = embed_operator(gates::c(), n, std::span<const int>(&a, 1));
    for (int w : g.neighbors(v)) {
        const int b = pos.at(w);
        u = embed_operator(gates::sdg(), n, std::span<const int>(&b, 1)) * u;
    }
    return u;
}

OpenGraph z_delete(const OpenGraph &g, int v, int outcome) {
    if (!g.has_vertex(v)) throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " is not in the graph");
    if (g.is_input(v)) throw Error(ErrorCode::InputVertex, "cannot delete input vertex " + std::to_string(v));
    if (g.is_output(v)) throw Error(ErrorCode::Validation, "cannot delete output vertex " + std::to_string(v));
    OpenGraph out = g;
    if (outcome == 1) {
        for (int u : g.neighbors(v)) out.decorate(u, LocalClifford::z());
    }
    out.remove_vertex(v);
    return out;
}

// ---------------------------------------------------------------------------
// Measurement plans

Vector PlanEntry::basis_vector(int outcome) const {
    if (basis == PlanBasis::Z) {
        Vector v = Vector::Zero(2);
        v(outcome) = 1.0;
        return v;
    }
    return (outcome == 0 ? StateVector::plus_theta(theta) : StateVector::minus_theta(theta)).amplitudes();
}

const PlanEntry *MeasurementPlan::find(int vertex) const {
    for (const PlanEntry &e : entries) {
        if (e.vertex == vertex) return &e;
    }
    return nullptr;
}

namespace {

PlanEntry entry_for_angle(int v, double theta) {
    PlanEntry e;
    e.vertex = v;
    e.theta = theta;
    double r = std::remainder(theta, kPi);  // in [-pi/2, pi/2]
    if (std::abs(r) < 1e-12) {
        e.basis = PlanBasis::X;
    } else if (std::abs(std::abs(r) - kPi / 2) < 1e-12) {
        e.basis = PlanBasis::Y;
    } else {
        e.basis = PlanBasis::Theta;
    }
    return e;
}

// Shortest text that parses back to the same double.
std::string angle_text(double theta) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, theta);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

std::pair<OpenGraph, MeasurementPlan> parse_graph(const std::string &text) {
    std::set<int> vertices;
    std::set<std::pair<int, int>> edges;
    std::vector<int> inputs;
    std::vector<int> outputs;
    MeasurementPlan plan;
    std::istringstream is(text);
    std::string raw;
    std::size_t line = 0;
    auto to_int = [&](const std::string &s) {
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception &) {
            throw Error(ErrorCode::Parse, "expected an integer, got '" + s + "'", line, 1);
        }
    };
    while (std::getline(is, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> w;
        for (std::string t; ls >> t;) w.push_back(t);
        if (w.empty()) continue;
        auto need = [&](std::size_t n) {
            if (w.size() != n) throw Error(ErrorCode::Parse, "'" + w[0] + "' takes " + std::to_string(n - 1) + " arguments", line, 1);
        };
        if (w[0] == "vertex") {
            for (std::size_t k = 1; k < w.size(); ++k) {
                auto dots = w[k].find("..");
                if (dots == std::string::npos) {
                    vertices.insert(to_int(w[k]));
                } else {
                    int lo = to_int(w[k].substr(0, dots));
                    int hi = to_int(w[k].substr(dots + 2));
                    for (int v = lo; v <= hi; ++v) vertices.insert(v);
                }
            }
        } else if (w[0] == "edge") {
            need(3);
            edges.insert(edge_key(to_int(w[1]), to_int(w[2])));
        } else if (w[0] == "input") {
            for (std::size_t k = 1; k < w.size(); ++k) inputs.push_back(to_int(w[k]));
        } else if (w[0] == "output") {
            for (std::size_t k = 1; k < w.size(); ++k) outputs.push_back(to_int(w[k]));
        } else if (w[0] == "measure") {
            need(3);
            int v = to_int(w[1]);
            PlanEntry e;
            if (w[2] == "X") {
                e = entry_for_angle(v, 0.0);
            } else if (w[2] == "Y") {
                e = entry_for_angle(v, kPi / 2);
            } else if (w[2] == "Z") {
                e.vertex = v;
                e.basis = PlanBasis::Z;
            } else if (w[2].rfind("theta=", 0) == 0) {
                try {
                    e = entry_for_angle(v, std::stod(w[2].substr(6)));
                } catch (const std::exception &) {
                    throw Error(ErrorCode::Parse, "bad angle '" + w[2] + "'", line, 1);
                }
            } else {
                throw Error(ErrorCode::Parse, "unknown basis '" + w[2] + "'", line, 1);
            }
            if (plan.find(v)) throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " measured twice", line, 1);
            plan.entries.push_back(e);
        } else {
            throw Error(ErrorCode::Parse, "unknown directive '" + w[0] + "'", line, 1);
        }
    }
    OpenGraph g(std::move(vertices), std::move(edges), std::move(inputs), std::move(outputs));
    for (const PlanEntry &e : plan.entries) {
        if (!g.has_vertex(e.vertex)) throw Error(ErrorCode::Validation, "measured vertex " + std::to_string(e.vertex) + " is not in the graph");
        if (g.is_output(e.vertex)) throw Error(ErrorCode::Validation, "output vertex " + std::to_string(e.vertex) + " is measured");
    }
    for (int v : g.vertices()) {
        if (!g.is_output(v) && !plan.find(v)) {
            throw Error(ErrorCode::Validation, "vertex " + std::to_string(v) + " is neither measured nor an output");
        }
    }
    return {std::move(g), std::move(plan)};
}

std::string format_graph(const OpenGraph &g, const MeasurementPlan &plan) {
    std::ostringstream os;
    os << "vertex";
    for (int v : g.vertices()) os << ' ' << v;
    os << '\n';
    for (auto [a, b] : g.edges()) os << "edge " << a << ' ' << b << '\n';
    for (int v : g.inputs()) os << "input " << v << '\n';
    for (int v : g.outputs()) os << "output " << v << '\n';
    for (const PlanEntry &e : plan.entries) {
        if (!g.has_vertex(e.vertex)) continue;
        os << "measure " << e.vertex << ' ';
        if (e.basis == PlanBasis::Z) {
            os << "Z";
        } else if (e.basis == PlanBasis::X && e.theta == 0.0) {
            os << "X";
        } else {
            os << "theta=" << angle_text(e.theta);
        }
        os << '\n';
    }
    return os.str();
}

std::pair<OpenGraph, MeasurementPlan> pattern_to_open_graph(const Pattern &p) {
    const Pattern c = canonicalize(p);
    std::set<int> vertices(c.qubits().begin(), c.qubits().end());
    std::set<std::pair<int, int>> edges;
    for (auto e : c.edges()) edges.insert(e);
    OpenGraph g(std::move(vertices), std::move(edges), c.inputs(), c.outputs());
    MeasurementPlan plan;
    std::vector<Command> pending;
    for (const Command &cmd : c.commands()) {
        if (cmd.is_correction()) {
            pending.push_back(cmd);
        } else if (cmd.kind == CommandKind::M) {
            PlanEntry e;
            if (cmd.z_basis) {
                e.vertex = cmd.qubit;
                e.basis = PlanBasis::Z;
            } else {
                e = entry_for_angle(cmd.qubit, cmd.theta);
            }
            e.pre = std::move(pending);
            pending.clear();
            plan.entries.push_back(std::move(e));
        }
    }
    plan.tail = std::move(pending);
    return {std::move(g), std::move(plan)};
}

// ---------------------------------------------------------------------------
// Emission and verification

namespace {

bool keeps(const OpenGraph &g, const Command &c) { return g.has_vertex(c.qubit) && (!c.dep || g.has_vertex(*c.dep)); }

// Pattern over the current graph with measurements and corrections still in
// the original frame; it is run on the frame state.
Pattern frame_pattern(const OpenGraph &g, const MeasurementPlan &plan) {
    std::vector<Command> cmds;
    for (int v : g.vertices()) {
        if (!g.is_input(v)) cmds.push_back(Command::n(v));
    }
    for (auto [a, b] : g.edges()) cmds.push_back(Command::e(a, b));
    for (const PlanEntry &e : plan.entries) {
        if (!g.has_vertex(e.vertex)) continue;
        for (const Command &c : e.pre) {
            if (keeps(g, c)) cmds.push_back(c);
        }
        cmds.push_back(e.basis == PlanBasis::Z ? Command::m_z(e.vertex) : Command::m(e.vertex, e.theta));
    }
    for (const Command &c : plan.tail) {
        if (keeps(g, c)) cmds.push_back(c);
    }
    return Pattern(g.inputs(), g.outputs(), std::move(cmds));
}

ProcessMap frame_map(const OpenGraph &g, const MeasurementPlan &plan, const std::map<int, int> &postselect = {}) {
    const int n_in = static_cast<int>(g.inputs().size());
    return execute_map_on_resource(
        frame_pattern(g, plan),
        [&](std::size_t i) { return g.frame_state(StateVector::basis(n_in, i).amplitudes()); }, postselect);
}

double renormalized_distance(const ChoiMatrix &a, const ChoiMatrix &b) {
    if (a.trace() < 1e-12 || b.trace() < 1e-12) return a.trace() < 1e-12 && b.trace() < 1e-12 ? 0.0 : 2.0;
    return choi_distance(a.renormalized(), b.renormalized());
}

// D P D^dagger as corrections in the current frame (sign dropped: it is a
// branch-dependent global phase).
void push_conjugated(std::vector<Command> &out, const Command &c, const LocalClifford &d) {
    auto [sign, p] = d.conjugate(c.kind == CommandKind::X ? Pauli::X : Pauli::Z);
    (void)sign;
    if (p == Pauli::Z || p == Pauli::Y) out.push_back(Command::z(c.qubit, c.dep));
    if (p == Pauli::X || p == Pauli::Y) out.push_back(Command::x(c.qubit, c.dep));
}

}  // namespace

ProcessMap decorated_map(const OpenGraph &g, const MeasurementPlan &plan) { return frame_map(g, plan); }

Pattern emit_pattern(const OpenGraph &g, const MeasurementPlan &plan) {
    for (int v : g.outputs()) {
        if (!g.decoration(v).is_identity()) {
            throw Error(ErrorCode::VerificationFailed,
                        "output " + std::to_string(v) + " carries decoration " + g.decoration(v).word());
        }
    }
    std::vector<Command> cmds;
    for (int v : g.vertices()) {
        if (!g.is_input(v)) cmds.push_back(Command::n(v));
    }
    for (auto [a, b] : g.edges()) cmds.push_back(Command::e(a, b));
    for (const PlanEntry &e : plan.entries) {
        if (!g.has_vertex(e.vertex)) continue;
        const LocalClifford d = g.decoration(e.vertex);
        for (const Command &c : e.pre) {
            if (keeps(g, c)) push_conjugated(cmds, c, g.decoration(c.qubit));
        }
        Vector b = d.matrix() * e.basis_vector(0);
        const double a0 = std::abs(b(0));
        const double a1 = std::abs(b(1));
        if (std::abs(a0 - a1) < 1e-9) {
            cmds.push_back(Command::m(e.vertex, std::arg(b(1) / b(0))));
        } else if (a1 < 1e-9) {
            cmds.push_back(Command::m_z(e.vertex));
        } else if (a0 < 1e-9) {
            // Outcome 0 of the original frame is |1> here.
            cmds.push_back(Command::x(e.vertex, std::nullopt));
            cmds.push_back(Command::m_z(e.vertex));
        } else {
            throw Error(ErrorCode::VerificationFailed,
                        "measurement of vertex " + std::to_string(e.vertex) + " leaves the XY plane after " + d.word());
        }
    }
    for (const Command &c : plan.tail) {
        if (keeps(g, c)) push_conjugated(cmds, c, g.decoration(c.qubit));
    }
    return Pattern(g.inputs(), g.outputs(), std::move(cmds));
}

std::string RewriteStep::to_string() const {
    switch (op) {
        case Op::LC: return "LC " + std::to_string(vertex);
        case Op::ZDEL: return "ZDEL " + std::to_string(vertex);
        case Op::DROP: return "DROP " + std::to_string(vertex);
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Elimination

namespace {

enum class Axis { X, Y, Z, Other };

// Axis of the current-frame measurement vector D|b0>, and the Z outcome it
// selects when it is a computational basis state.
Axis classify(const Vector &b, int *z_outcome) {
    const double a0 = std::abs(b(0));
    const double a1 = std::abs(b(1));
    if (a1 < 1e-9) {
        *z_outcome = 0;
        return Axis::Z;
    }
    if (a0 < 1e-9) {
        *z_outcome = 1;
        return Axis::Z;
    }
    if (std::abs(a0 - a1) > 1e-9) return Axis::Other;
    Complex ratio = b(1) / b(0);
    if (std::abs(ratio.imag()) < 1e-9) return Axis::X;
    if (std::abs(ratio.real()) < 1e-9) return Axis::Y;
    return Axis::Other;
}

bool has_foreign_corrections(const PlanEntry &e) {
    return std::any_of(e.pre.begin(), e.pre.end(), [&](const Command &c) { return c.dep && *c.dep != e.vertex; });
}

}  // namespace

Elimination eliminate_pauli_measurements(const OpenGraph &g, const MeasurementPlan &plan) {
    Elimination st{g, plan, {}, {}};

    auto verify = [&](const RewriteStep &step) {
        std::map<int, int> post;
        for (int v : st.eliminated) post[v] = 0;
        ChoiMatrix want = frame_map(g, plan, post).choi;
        ChoiMatrix have = frame_map(st.graph, st.plan).choi;
        double d = renormalized_distance(want, have);
        if (d > 1e-9) {
            throw Error(ErrorCode::VerificationFailed,
                        "step " + step.to_string() + " changed the map (distance " + std::to_string(d) + ")");
        }
    };

    const std::size_t cap = 8 * (g.vertices().size() + 1) * (g.vertices().size() + 1);
    for (std::size_t iter = 0; iter < cap; ++iter) {
        std::optional<RewriteStep> step;
        std::vector<const PlanEntry *> order;
        for (const PlanEntry &e : st.plan.entries) order.push_back(&e);
        std::sort(order.begin(), order.end(), [](const PlanEntry *a, const PlanEntry *b) { return a->vertex < b->vertex; });
        for (const PlanEntry *entry : order) {
            const PlanEntry &e = *entry;
            const int v = e.vertex;
            if (e.basis == PlanBasis::Theta || !st.graph.has_vertex(v)) continue;
            if (st.graph.is_input(v) || has_foreign_corrections(e)) continue;
            Vector b = st.graph.decoration(v).matrix() * e.basis_vector(0);
            int z_outcome = 0;
            Axis axis = classify(b, &z_outcome);
            if (axis == Axis::Z) {
                st.graph = z_delete(st.graph, v, z_outcome);
                st.eliminated.push_back(v);
                step = RewriteStep{RewriteStep::Op::ZDEL, v, 0.5};
            } else if (st.graph.neighbors(v).empty()) {
                // Isolated |+>: keep the original-frame outcome 0.
                double p = std::norm(b.dot(StateVector::plus().amplitudes()));
                st.graph.remove_vertex(v);
                st.eliminated.push_back(v);
                step = RewriteStep{RewriteStep::Op::DROP, v, p};
            } else if (axis == Axis::Y) {
                st.graph = local_complement(st.graph, v);
                step = RewriteStep{RewriteStep::Op::LC, v, 1.0};
            } else if (axis == Axis::X) {
                std::optional<int> pivot;
                for (int w : st.graph.neighbors(v)) {
                    if (!st.graph.is_input(w) && !st.graph.is_output(w)) {
                        pivot = w;
                        break;
                    }
                }
                if (!pivot) continue;
                st.graph = local_complement(st.graph, *pivot);
                step = RewriteStep{RewriteStep::Op::LC, *pivot, 1.0};
            } else {
                continue;
            }
            break;
        }
        if (!step) break;
        st.log.push_back(*step);
        verify(*step);
    }
    return st;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

bool dep_after_measurement(const Pattern &p, int s) {
    const std::size_t m = p.measurement_index(s);
    const auto &cmds = p.commands();
    for (std::size_t i = 0; i < m; ++i) {
        if (cmds[i].is_correction() && cmds[i].dep == s) return false;
    }
    return true;
}

// Index subsets of {0..n-1} of size k, lexicographic.
void subsets_of_size(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>> &out) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > n) return;
    while (true) {
        out.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

namespace {

// Tr_out C = c I for some c > 0: every input succeeds with the same probability.
bool proportional_to_trace_preserving(const ChoiMatrix &choi) {
    Matrix marginal = choi.input_marginal();
    double c = marginal.trace().real() / static_cast<double>(marginal.rows());
    if (c < 1e-12) return false;
    return (marginal / c - Matrix::Identity(marginal.rows(), marginal.cols())).norm() < 1e-9;
}

}  // namespace

CtcSimulation deterministic_ctc_simulation(const Circuit &bss) {
    CtcSimulation out;
    const Circuit plus = rewrite_to_plus_form(bss);
    out.translated = standardize(circuit_to_pattern(plus));

    auto [graph, plan] = pattern_to_open_graph(out.translated);
    Elimination el = eliminate_pauli_measurements(graph, plan);
    out.log = el.log;
    out.pattern = emit_pattern(el.graph, el.plan);
    {
        std::map<int, int> post;
        for (int v : el.eliminated) post[v] = 0;
        double d = renormalized_distance(execute_map(out.translated, post).choi, execute_map(out.pattern).choi);
        if (d > 1e-9) {
            throw Error(ErrorCode::VerificationFailed, "emitted pattern differs from the eliminated graph (distance " +
                                                           std::to_string(d) + ")");
        }
    }
    const ProcessMap pattern_map = execute_map(out.pattern);
    out.deterministic = pattern_map.deterministic && proportional_to_trace_preserving(pattern_map.choi);
    out.map_distance = renormalized_distance(pattern_map.choi, postselected_map(bss).choi);

    Pattern current = canonicalize(out.pattern);
    for (int s : current.anachronical_signals()) {
        if (dep_after_measurement(current, s)) continue;
        const auto gens = stabilizers_of_resource(current);
        bool done = false;
        for (std::size_t k = 1; k <= std::min<std::size_t>(gens.size(), 3) && !done; ++k) {
            std::vector<std::vector<std::size_t>> subsets;
            subsets_of_size(gens.size(), k, subsets);
            for (const auto &subset : subsets) {
                Pattern candidate = current;
                try {
                    for (std::size_t i : subset) candidate = apply_stabilizer_rewrite(candidate, gens[i].word, s);
                } catch (const Error &) {
                    continue;
                }
                candidate = canonicalize(candidate);
                if (!dep_after_measurement(candidate, s)) continue;
                for (std::size_t i : subset) out.rewrites.push_back({gens[i].word, s});
                current = std::move(candidate);
                done = true;
                break;
            }
        }
    }
    if (!current.is_anachronical()) out.time_respecting_pattern = current;
    return out;
}

}  // namespace ctcmbqc
