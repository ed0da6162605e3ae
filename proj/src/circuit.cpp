#include "ctcmbqc/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "ctcmbqc/error.hpp"
#include "json_io.hpp"

namespace ctcmbqc {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Gates

const char *gate_kind_name(GateKind kind) {
    switch (kind) {
        case GateKind::J: return "J";
        case GateKind::CZ: return "CZ";
        case GateKind::CX: return "CX";
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::S: return "S";
        case GateKind::Sdag: return "Sdag";
        case GateKind::C: return "C";
        case GateKind::Cdag: return "Cdag";
        case GateKind::SWAP: return "SWAP";
        case GateKind::U: return "U";
    }
    return "?";
}

GateKind gate_kind_from_name(const std::string &name) {
    static const std::map<std::string, GateKind> kNames = {
        {"J", GateKind::J},     {"CZ", GateKind::CZ},     {"CX", GateKind::CX},     {"CNOT", GateKind::CX},
        {"H", GateKind::H},     {"X", GateKind::X},       {"Y", GateKind::Y},       {"Z", GateKind::Z},
        {"S", GateKind::S},     {"Sdag", GateKind::Sdag}, {"C", GateKind::C},       {"Cdag", GateKind::Cdag},
        {"SWAP", GateKind::SWAP}, {"U", GateKind::U}};
    auto it = kNames.find(name);
    if (it == kNames.end()) throw Error(ErrorCode::UnsupportedGate, "unknown gate '" + name + "'");
    return it->second;
}

int gate_arity(GateKind kind) {
    switch (kind) {
        case GateKind::CZ:
        case GateKind::CX:
        case GateKind::SWAP: return 2;
        case GateKind::U: return -1;
        default: return 1;
    }
}

Gate Gate::j(int q, double theta) {
    Gate g;
    g.kind = GateKind::J;
    g.targets = {q};
    g.theta = theta;
    return g;
}

Gate Gate::cz(int a, int b) {
    Gate g;
    g.kind = GateKind::CZ;
    g.targets = {a, b};
    return g;
}

Gate Gate::cx(int control, int target) {
    Gate g;
    g.kind = GateKind::CX;
    g.targets = {control, target};
    return g;
}

Gate Gate::single(GateKind kind, int q) {
    Gate g;
    g.kind = kind;
    g.targets = {q};
    return g;
}

Gate Gate::swap(int a, int b) {
    Gate g;
    g.kind = GateKind::SWAP;
    g.targets = {a, b};
    return g;
}

Gate Gate::unitary(Matrix m, std::vector<int> targets) {
    Gate g;
    g.kind = GateKind::U;
    g.matrix = std::move(m);
    g.targets = std::move(targets);
    return g;
}

Gate Gate::controlled_by(int signal, bool anachronical) const {
    Gate g = *this;
    g.control = ClassicalControl{signal, anachronical};
    return g;
}

Matrix Gate::unitary_matrix() const {
    switch (kind) {
        case GateKind::J: return gates::j(theta);
        case GateKind::CZ: return gates::cz();
        case GateKind::CX: return gates::cx();
        case GateKind::H: return gates::h();
        case GateKind::X: return gates::x();
        case GateKind::Y: return gates::y();
        case GateKind::Z: return gates::z();
        case GateKind::S: return gates::s();
        case GateKind::Sdag: return gates::sdg();
        case GateKind::C: return gates::c();
        case GateKind::Cdag: return gates::cdg();
        case GateKind::SWAP: return gates::swap();
        case GateKind::U: return matrix;
    }
    return matrix;
}

Vector Measurement::basis_vector(int outcome) const {
    Vector v = Vector::Zero(2);
    switch (basis) {
        case MeasureBasis::Z: v(outcome) = 1.0; break;
        case MeasureBasis::X: v = (outcome == 0 ? StateVector::plus_theta(0) : StateVector::minus_theta(0)).amplitudes(); break;
        case MeasureBasis::Theta:
            v = (outcome == 0 ? StateVector::plus_theta(theta) : StateVector::minus_theta(theta)).amplitudes();
            break;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Circuit validation

namespace {

std::vector<int> event_qubits(const Event &ev) {
    if (auto g = std::get_if<Gate>(&ev)) return g->targets;
    if (auto m = std::get_if<Measurement>(&ev)) return {m->qubit};
    if (auto b = std::get_if<BellPrep>(&ev)) return {b->first, b->second};
    const auto &bm = std::get<BellMeasurement>(ev);
    return {bm.first, bm.second};
}

enum class Liveness { Unborn, Live, Dead };

}  // namespace

Circuit::Circuit(int num_qubits, std::vector<Prep> preps, std::vector<Event> timeline, std::vector<CtcWire> ctc_wires)
    : num_qubits_(num_qubits), preps_(std::move(preps)), timeline_(std::move(timeline)), ctc_wires_(std::move(ctc_wires)) {
    validate();
}

void Circuit::validate() {
    if (num_qubits_ < 0) throw Error(ErrorCode::Validation, "negative qubit count");
    auto in_range = [&](int q) { return q >= 1 && q <= num_qubits_; };

    std::set<int> prepped;
    for (const Prep &p : preps_) {
        if (!in_range(p.qubit)) throw Error(ErrorCode::Validation, "preparation on unknown qubit " + std::to_string(p.qubit));
        if (!prepped.insert(p.qubit).second) {
            throw Error(ErrorCode::Validation, "qubit " + std::to_string(p.qubit) + " prepared twice");
        }
    }

    std::set<int> late_born;
    std::map<int, std::size_t> measured_at;
    for (std::size_t i = 0; i < timeline_.size(); ++i) {
        const Event &ev = timeline_[i];
        for (int q : event_qubits(ev)) {
            if (!in_range(q)) throw Error(ErrorCode::Validation, "unknown qubit " + std::to_string(q), i);
        }
        if (auto b = std::get_if<BellPrep>(&ev)) {
            for (int q : {b->first, b->second}) {
                if (prepped.count(q) || !late_born.insert(q).second) {
                    throw Error(ErrorCode::Validation, "Bell preparation on an already prepared qubit " + std::to_string(q), i);
                }
            }
        }
        if (auto m = std::get_if<Measurement>(&ev)) {
            if (measured_at.count(m->qubit)) {
                throw Error(ErrorCode::Validation, "qubit " + std::to_string(m->qubit) + " measured twice", i);
            }
            measured_at[m->qubit] = i;
        }
    }
    for (CtcWire &w : ctc_wires_) {
        if (w.exit >= timeline_.size() || w.reentry >= timeline_.size()) {
            throw Error(ErrorCode::Validation, "CTC wire refers to a missing event");
        }
        if (w.reentry > w.exit) {
            throw Error(ErrorCode::Validation, "CTC wire must exit later than it re-enters", w.exit);
        }
        if (!in_range(w.exit_qubit) || !in_range(w.reentry_qubit)) {
            throw Error(ErrorCode::Validation, "CTC wire on unknown qubit", w.exit);
        }
        if (prepped.count(w.reentry_qubit) || !late_born.insert(w.reentry_qubit).second) {
            throw Error(ErrorCode::Validation, "CTC reentry qubit " + std::to_string(w.reentry_qubit) + " is already prepared",
                        w.reentry);
        }
        auto touches = [&](std::size_t ev, int q) {
            auto qs = event_qubits(timeline_[ev]);
            return std::find(qs.begin(), qs.end(), q) != qs.end();
        };
        if (!touches(w.exit, w.exit_qubit)) {
            throw Error(ErrorCode::Validation, "CTC exit event does not act on qubit " + std::to_string(w.exit_qubit), w.exit);
        }
        if (!touches(w.reentry, w.reentry_qubit)) {
            throw Error(ErrorCode::Validation, "CTC reentry event does not act on qubit " + std::to_string(w.reentry_qubit),
                        w.reentry);
        }
    }

    std::vector<Liveness> state(static_cast<std::size_t>(num_qubits_) + 1, Liveness::Live);
    inputs_.clear();
    for (int q = 1; q <= num_qubits_; ++q) {
        if (late_born.count(q)) {
            state[static_cast<std::size_t>(q)] = Liveness::Unborn;
        } else if (!prepped.count(q)) {
            inputs_.push_back(q);
        }
    }

    auto require_live = [&](int q, std::size_t i) {
        if (state[static_cast<std::size_t>(q)] != Liveness::Live) {
            throw Error(ErrorCode::Validation, "qubit " + std::to_string(q) + " is not live here", i);
        }
    };

    for (std::size_t i = 0; i < timeline_.size(); ++i) {
        for (const CtcWire &w : ctc_wires_) {
            if (w.reentry == i) state[static_cast<std::size_t>(w.reentry_qubit)] = Liveness::Live;
        }
        const Event &ev = timeline_[i];
        if (auto g = std::get_if<Gate>(&ev)) {
            std::set<int> distinct(g->targets.begin(), g->targets.end());
            if (distinct.size() != g->targets.size() || g->targets.empty()) {
                throw Error(ErrorCode::Validation, "gate targets must be distinct and nonempty", i);
            }
            int arity = gate_arity(g->kind);
            if (arity > 0 && static_cast<int>(g->targets.size()) != arity) {
                throw Error(ErrorCode::Validation, std::string(gate_kind_name(g->kind)) + " expects " +
                                                       std::to_string(arity) + " targets", i);
            }
            if (g->kind == GateKind::U) {
                auto d = Eigen::Index{1} << g->targets.size();
                if (g->matrix.rows() != d || g->matrix.cols() != d) {
                    throw Error(ErrorCode::Validation, "U matrix size does not match its targets", i);
                }
                if (!is_unitary(g->matrix, 1e-10)) throw Error(ErrorCode::NonUnitary, "U matrix is not unitary", i);
            }
            for (int q : g->targets) require_live(q, i);
            if (g->control) {
                auto it = measured_at.find(g->control->signal);
                if (it == measured_at.end()) {
                    throw Error(ErrorCode::UnknownSignal, "signal s" + std::to_string(g->control->signal) + " is never measured", i);
                }
                bool backwards = it->second > i;
                if (backwards != g->control->anachronical) {
                    throw Error(ErrorCode::Validation,
                                backwards ? "control from a later measurement must be flagged anachronical"
                                          : "control flagged anachronical but its measurement precedes the gate",
                                i);
                }
            }
        } else if (auto m = std::get_if<Measurement>(&ev)) {
            require_live(m->qubit, i);
            if (m->postselect && (*m->postselect < 0 || *m->postselect > 1)) {
                throw Error(ErrorCode::Validation, "postselected outcome must be 0 or 1", i);
            }
            state[static_cast<std::size_t>(m->qubit)] = Liveness::Dead;
        } else if (auto b = std::get_if<BellPrep>(&ev)) {
            if (b->first == b->second) throw Error(ErrorCode::Validation, "Bell pair on a single qubit", i);
            state[static_cast<std::size_t>(b->first)] = Liveness::Live;
            state[static_cast<std::size_t>(b->second)] = Liveness::Live;
        } else {
            const auto &bm = std::get<BellMeasurement>(ev);
            if (bm.first == bm.second) throw Error(ErrorCode::Validation, "Bell measurement on a single qubit", i);
            if (bm.postselect < 0 || bm.postselect > 3) throw Error(ErrorCode::Validation, "Bell outcome must be 0..3", i);
            require_live(bm.first, i);
            require_live(bm.second, i);
            state[static_cast<std::size_t>(bm.first)] = Liveness::Dead;
            state[static_cast<std::size_t>(bm.second)] = Liveness::Dead;
        }
        for (const CtcWire &w : ctc_wires_) {
            if (w.exit == i) {
                require_live(w.exit_qubit, i);
                state[static_cast<std::size_t>(w.exit_qubit)] = Liveness::Dead;
            }
        }
    }

    outputs_.clear();
    for (int q = 1; q <= num_qubits_; ++q) {
        if (state[static_cast<std::size_t>(q)] == Liveness::Live) outputs_.push_back(q);
    }
    signals_.clear();
    for (auto &[q, ev] : measured_at) signals_.push_back(q);
}

std::vector<ClassicalEdge> Circuit::classical_edges() const {
    std::vector<ClassicalEdge> edges;
    for (std::size_t i = 0; i < timeline_.size(); ++i) {
        if (auto g = std::get_if<Gate>(&timeline_[i]); g && g->control) {
            edges.push_back({measurement_event(g->control->signal), i, g->control->anachronical});
        }
    }
    return edges;
}

std::vector<int> Circuit::anachronical_signals() const {
    std::set<int> out;
    for (const Event &ev : timeline_) {
        if (auto g = std::get_if<Gate>(&ev); g && g->control && g->control->anachronical) out.insert(g->control->signal);
    }
    return {out.begin(), out.end()};
}

bool Circuit::is_anachronical() const { return !anachronical_signals().empty(); }

bool Circuit::has_bell_elements() const {
    return std::any_of(timeline_.begin(), timeline_.end(), [](const Event &ev) {
        return std::holds_alternative<BellPrep>(ev) || std::holds_alternative<BellMeasurement>(ev);
    });
}

std::size_t Circuit::measurement_event(int signal) const {
    for (std::size_t i = 0; i < timeline_.size(); ++i) {
        if (auto m = std::get_if<Measurement>(&timeline_[i]); m && m->qubit == signal) return i;
    }
    throw Error(ErrorCode::UnknownSignal, "signal s" + std::to_string(signal) + " is never measured");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string &text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

Complex complex_from_json(const json &v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw Error(ErrorCode::Validation, "matrix entries must be numbers or [re, im] pairs");
}

std::vector<int> int_list(const json &v, const char *what) {
    if (!v.is_array()) throw Error(ErrorCode::Validation, std::string(what) + " must be an array");
    std::vector<int> out;
    for (const auto &x : v) out.push_back(x.get<int>());
    return out;
}

}  // namespace

Gate gate_from_json(const json &j) {
    Gate g;
    g.kind = gate_kind_from_name(j.at("gate").get<std::string>());
    g.targets = int_list(j.at("targets"), "targets");
    if (g.kind == GateKind::J) g.theta = j.at("theta").get<double>();
    if (g.kind == GateKind::U) {
        const json &rows = j.at("matrix");
        auto d = static_cast<Eigen::Index>(rows.size());
        g.matrix = Matrix::Zero(d, d);
        for (Eigen::Index r = 0; r < d; ++r) {
            const json &row = rows[static_cast<std::size_t>(r)];
            if (static_cast<Eigen::Index>(row.size()) != d) throw Error(ErrorCode::Validation, "U matrix must be square");
            for (Eigen::Index c = 0; c < d; ++c) g.matrix(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
        }
    }
    if (j.contains("control")) {
        const json &c = j.at("control");
        g.control = ClassicalControl{c.at("signal").get<int>(), c.value("anachronical", false)};
    }
    return g;
}

json gate_to_json(const Gate &g) {
    json j;
    j["gate"] = gate_kind_name(g.kind);
    j["targets"] = g.targets;
    if (g.kind == GateKind::J) j["theta"] = g.theta;
    if (g.kind == GateKind::U) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < g.matrix.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < g.matrix.cols(); ++c) row.push_back({g.matrix(r, c).real(), g.matrix(r, c).imag()});
            rows.push_back(row);
        }
        j["matrix"] = rows;
    }
    if (g.control) j["control"] = {{"signal", g.control->signal}, {"anachronical", g.control->anachronical}};
    return j;
}

namespace {

Event event_from_json(const json &j) {
    if (j.contains("gate")) return gate_from_json(j);
    if (j.contains("measure")) {
        const json &m = j.at("measure");
        Measurement out;
        out.qubit = m.at("q").get<int>();
        const json &basis = m.contains("basis") ? m.at("basis") : json("Z");
        if (basis.is_string()) {
            auto b = basis.get<std::string>();
            if (b == "Z") {
                out.basis = MeasureBasis::Z;
            } else if (b == "X") {
                out.basis = MeasureBasis::X;
            } else {
                throw Error(ErrorCode::Validation, "unknown measurement basis '" + b + "'");
            }
        } else {
            out.basis = MeasureBasis::Theta;
            out.theta = basis.at("theta").get<double>();
        }
        if (m.contains("postselect") && !m.at("postselect").is_null()) out.postselect = m.at("postselect").get<int>();
        return out;
    }
    if (j.contains("bell_prep")) {
        auto qs = int_list(j.at("bell_prep"), "bell_prep");
        if (qs.size() != 2) throw Error(ErrorCode::Validation, "bell_prep needs two qubits");
        return BellPrep{qs[0], qs[1]};
    }
    if (j.contains("bell_measure")) {
        const json &b = j.at("bell_measure");
        auto qs = int_list(b.at("qubits"), "bell_measure.qubits");
        if (qs.size() != 2) throw Error(ErrorCode::Validation, "bell_measure needs two qubits");
        return BellMeasurement{qs[0], qs[1], b.value("postselect", 0)};
    }
    throw Error(ErrorCode::Validation, "unknown timeline event " + j.dump());
}

json event_to_json(const Event &ev) {
    if (auto g = std::get_if<Gate>(&ev)) return gate_to_json(*g);
    if (auto m = std::get_if<Measurement>(&ev)) {
        json inner;
        inner["q"] = m->qubit;
        switch (m->basis) {
            case MeasureBasis::Z: inner["basis"] = "Z"; break;
            case MeasureBasis::X: inner["basis"] = "X"; break;
            case MeasureBasis::Theta: inner["basis"] = {{"theta", m->theta}}; break;
        }
        if (m->postselect) inner["postselect"] = *m->postselect;
        return {{"measure", inner}};
    }
    if (auto b = std::get_if<BellPrep>(&ev)) return {{"bell_prep", {b->first, b->second}}};
    const auto &bm = std::get<BellMeasurement>(ev);
    json inner;
    inner["qubits"] = {bm.first, bm.second};
    inner["postselect"] = bm.postselect;
    return {{"bell_measure", inner}};
}

// The single target of a one-qubit event, used when a CTC wire omits its qubit.
int sole_qubit(const std::vector<Event> &timeline, std::size_t ev, const char *what) {
    if (ev >= timeline.size()) throw Error(ErrorCode::Validation, std::string("CTC ") + what + " event out of range");
    auto qs = event_qubits(timeline[ev]);
    if (qs.size() != 1) {
        throw Error(ErrorCode::Validation, std::string("CTC ") + what + " qubit is ambiguous; name it explicitly", ev);
    }
    return qs[0];
}

}  // namespace

json parse_json_document(const std::string &text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorCode::Parse, e.what(), line, column);
    }
}

Circuit parse_circuit(const std::string &text) {
    json doc = parse_json_document(text);
    std::size_t current_event = 0;
    try {
        if (!doc.is_object()) throw Error(ErrorCode::Parse, "circuit document must be a JSON object", 1, 1);
        int n = doc.at("qubits").get<int>();
        std::vector<Prep> preps;
        if (doc.contains("preps")) {
            for (const auto &p : doc.at("preps")) {
                auto s = p.value("state", std::string("plus"));
                if (s != "plus" && s != "zero") throw Error(ErrorCode::Validation, "preparation state must be plus or zero");
                preps.push_back({p.at("q").get<int>(), s == "plus" ? PrepState::Plus : PrepState::Zero});
            }
        }
        std::vector<Event> timeline;
        if (doc.contains("timeline")) {
            for (const auto &ev : doc.at("timeline")) {
                current_event = timeline.size();
                timeline.push_back(event_from_json(ev));
            }
        }
        std::vector<CtcWire> wires;
        if (doc.contains("ctc_wires")) {
            for (const auto &w : doc.at("ctc_wires")) {
                CtcWire wire;
                wire.exit = w.at("exit").get<std::size_t>();
                wire.reentry = w.at("reentry").get<std::size_t>();
                int shared = w.value("qubit", 0);
                wire.exit_qubit = w.value("exit_qubit", shared);
                wire.reentry_qubit = w.value("reentry_qubit", shared);
                if (wire.exit_qubit == 0) wire.exit_qubit = sole_qubit(timeline, wire.exit, "exit");
                if (wire.reentry_qubit == 0) wire.reentry_qubit = sole_qubit(timeline, wire.reentry, "reentry");
                wires.push_back(wire);
            }
        }
        return Circuit(n, std::move(preps), std::move(timeline), std::move(wires));
    } catch (const Error &e) {
        if (e.event() || e.line() || e.code() != ErrorCode::Validation) throw;
        throw Error(e.code(), e.what(), current_event);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::Validation, e.what(), current_event);
    }
}

std::string serialize_circuit(const Circuit &circuit) {
    json doc;
    doc["qubits"] = circuit.num_qubits();
    json preps = json::array();
    for (const Prep &p : circuit.preps()) {
        json entry;
        entry["q"] = p.qubit;
        entry["state"] = p.state == PrepState::Plus ? "plus" : "zero";
        preps.push_back(entry);
    }
    doc["preps"] = preps;
    json timeline = json::array();
    for (const Event &ev : circuit.timeline()) timeline.push_back(event_to_json(ev));
    doc["timeline"] = timeline;
    if (!circuit.ctc_wires().empty()) {
        json wires = json::array();
        for (const CtcWire &w : circuit.ctc_wires()) {
            json entry;
            entry["exit"] = w.exit;
            entry["reentry"] = w.reentry;
            entry["exit_qubit"] = w.exit_qubit;
            entry["reentry_qubit"] = w.reentry_qubit;
            wires.push_back(entry);
        }
        doc["ctc_wires"] = wires;
    }
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Simulation

double BranchSet::total_probability() const {
    double total = 0.0;
    for (const Branch &b : branches) total += b.probability;
    return total;
}

namespace {

class Engine {
   public:
    Engine(const Circuit &c, std::map<int, int> forced) : c_(c), forced_(std::move(forced)) {}

    void run(std::size_t idx, Vector state, std::map<int, int> outcomes) {
        const auto &timeline = c_.timeline();
        const int n = c_.num_qubits();
        for (; idx < timeline.size(); ++idx) {
            const Event &ev = timeline[idx];
            if (auto g = std::get_if<Gate>(&ev)) {
                if (g->control && signal_value(g->control->signal, outcomes) == 0) continue;
                apply_operator(state, n, g->targets, g->unitary_matrix());
            } else if (auto m = std::get_if<Measurement>(&ev)) {
                std::vector<int> allowed = {0, 1};
                if (m->postselect) allowed = {*m->postselect};
                if (auto f = forced_.find(m->qubit); f != forced_.end()) {
                    if (std::find(allowed.begin(), allowed.end(), f->second) == allowed.end()) return;
                    allowed = {f->second};
                }
                const int q = m->qubit;
                for (std::size_t k = 0; k + 1 < allowed.size(); ++k) {
                    Vector branch = state;
                    project_qubits(branch, n, std::span<const int>(&q, 1), m->basis_vector(allowed[k]));
                    auto next = outcomes;
                    next[q] = allowed[k];
                    run(idx + 1, std::move(branch), std::move(next));
                }
                project_qubits(state, n, std::span<const int>(&q, 1), m->basis_vector(allowed.back()));
                outcomes[q] = allowed.back();
            } else if (auto b = std::get_if<BellPrep>(&ev)) {
                const int first = b->first;
                apply_operator(state, n, std::span<const int>(&first, 1), gates::h());
                std::vector<int> pair = {b->first, b->second};
                apply_operator(state, n, pair, gates::cx());
            } else {
                const auto &bm = std::get<BellMeasurement>(ev);
                std::vector<int> pair = {bm.first, bm.second};
                project_qubits(state, n, pair, bell_state(bm.postselect));
            }
        }
        Branch br;
        for (auto [s, v] : outcomes) br.outcomes.emplace_back(s, v);
        Vector out = extract_qubits(state, n, c_.output_qubits());
        br.probability = out.squaredNorm();
        br.state = StateVector(std::move(out), 1e-8);
        branches.push_back(std::move(br));
    }

    std::vector<Branch> branches;

   private:
    int signal_value(int signal, const std::map<int, int> &outcomes) const {
        if (auto it = outcomes.find(signal); it != outcomes.end()) return it->second;
        if (auto it = forced_.find(signal); it != forced_.end()) return it->second;
        throw Error(ErrorCode::RequiresConsistencySemantics, "signal s" + std::to_string(signal) + " used before it exists");
    }

    const Circuit &c_;
    std::map<int, int> forced_;
};

Vector initial_register(const Circuit &c, const StateVector &input) {
    const auto &inputs = c.input_qubits();
    if (input.dimension() != (std::size_t{1} << inputs.size())) {
        throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(input.num_qubits()) + " qubits, circuit expects " +
                                                      std::to_string(inputs.size()));
    }
    Vector state = embed_qubits(input.amplitudes(), c.num_qubits(), inputs);
    for (const Prep &p : c.preps()) {
        if (p.state == PrepState::Plus) {
            const int q = p.qubit;
            apply_operator(state, c.num_qubits(), std::span<const int>(&q, 1), gates::h());
        }
    }
    return state;
}

void sort_branches(std::vector<Branch> &branches) {
    std::stable_sort(branches.begin(), branches.end(), [](const Branch &a, const Branch &b) {
        return a.outcomes < b.outcomes;
    });
}

BranchSet run_with_assumptions(const Circuit &c, const StateVector &input) {
    Vector start = initial_register(c, input);
    std::vector<int> assumed = c.anachronical_signals();
    BranchSet out;
    out.output_qubits = c.output_qubits();
    const std::size_t combos = std::size_t{1} << assumed.size();
    for (std::size_t a = 0; a < combos; ++a) {
        std::map<int, int> forced;
        for (std::size_t k = 0; k < assumed.size(); ++k) {
            forced[assumed[k]] = static_cast<int>((a >> (assumed.size() - 1 - k)) & 1U);
        }
        Engine engine(c, std::move(forced));
        engine.run(0, start, {});
        for (auto &b : engine.branches) out.branches.push_back(std::move(b));
    }
    sort_branches(out.branches);
    return out;
}

}  // namespace

BranchSet simulate(const Circuit &circuit, const StateVector &input) {
    if (!circuit.ctc_wires().empty()) {
        throw Error(ErrorCode::RequiresConsistencySemantics, "circuit declares CTC wires");
    }
    if (circuit.is_anachronical()) {
        throw Error(ErrorCode::RequiresConsistencySemantics, "circuit has anachronical classical control");
    }
    return run_with_assumptions(circuit, input);
}

BranchSet simulate_consistent(const Circuit &circuit, const StateVector &input) {
    if (!circuit.ctc_wires().empty()) return run_with_assumptions(resolve_ctc_wires(circuit), input);
    return run_with_assumptions(circuit, input);
}

Circuit resolve_ctc_wires(const Circuit &circuit) {
    if (circuit.ctc_wires().empty()) return circuit;
    const auto &wires = circuit.ctc_wires();
    int n = circuit.num_qubits();
    std::vector<Event> timeline;
    for (std::size_t i = 0; i < circuit.timeline().size(); ++i) {
        for (std::size_t w = 0; w < wires.size(); ++w) {
            if (wires[w].reentry == i) timeline.push_back(BellPrep{wires[w].reentry_qubit, n + 1 + static_cast<int>(w)});
        }
        timeline.push_back(circuit.timeline()[i]);
        for (std::size_t w = 0; w < wires.size(); ++w) {
            if (wires[w].exit == i) timeline.push_back(BellMeasurement{wires[w].exit_qubit, n + 1 + static_cast<int>(w), 0});
        }
    }
    return Circuit(n + static_cast<int>(wires.size()), circuit.preps(), std::move(timeline));
}

ProcessMap postselected_map(const Circuit &circuit, const std::vector<int> &inputs, const std::vector<int> &outputs) {
    const Circuit c = resolve_ctc_wires(circuit);
    std::vector<int> sorted_inputs = inputs;
    std::sort(sorted_inputs.begin(), sorted_inputs.end());
    if (sorted_inputs != c.input_qubits()) {
        throw Error(ErrorCode::DimensionMismatch, "designated inputs do not match the circuit's input qubits");
    }
    const auto &circuit_outputs = c.output_qubits();
    std::vector<int> keep;
    for (int q : outputs) {
        auto it = std::find(circuit_outputs.begin(), circuit_outputs.end(), q);
        if (it == circuit_outputs.end()) {
            throw Error(ErrorCode::DimensionMismatch, "qubit " + std::to_string(q) + " is not an output");
        }
        keep.push_back(static_cast<int>(it - circuit_outputs.begin()) + 1);
    }

    const int n_in = static_cast<int>(inputs.size());
    const std::size_t din = std::size_t{1} << n_in;
    std::vector<std::vector<Vector>> images;  // [branch][input basis]
    for (std::size_t i = 0; i < din; ++i) {
        // Basis state |i> over `inputs` order, re-expressed over ascending order.
        Vector payload = Vector::Zero(static_cast<Eigen::Index>(din));
        std::size_t idx = 0;
        for (int k = 0; k < n_in; ++k) {
            if ((i >> (n_in - 1 - k)) & 1U) {
                auto pos = std::find(sorted_inputs.begin(), sorted_inputs.end(), inputs[static_cast<std::size_t>(k)]) -
                           sorted_inputs.begin();
                idx |= std::size_t{1} << (n_in - 1 - pos);
            }
        }
        payload(static_cast<Eigen::Index>(idx)) = 1.0;
        BranchSet bs = simulate_consistent(c, StateVector(payload));
        if (i == 0) images.resize(bs.branches.size());
        if (bs.branches.size() != images.size()) {
            throw Error(ErrorCode::VerificationFailed, "branch structure depends on the input");
        }
        for (std::size_t b = 0; b < bs.branches.size(); ++b) images[b].push_back(bs.branches[b].state.amplitudes());
    }

    ProcessMap out;
    const int n_out_all = static_cast<int>(circuit_outputs.size());
    auto dim = Eigen::Index{1} << (n_in + static_cast<int>(keep.size()));
    Matrix total = Matrix::Zero(dim, dim);
    for (const auto &imgs : images) {
        ChoiMatrix cb = choi_from_images(imgs, n_out_all, keep);
        total += cb.matrix();
        out.branch_maps.push_back(std::move(cb));
    }
    out.choi = ChoiMatrix(std::move(total), n_in, static_cast<int>(keep.size()));
    const ChoiMatrix *reference = nullptr;
    for (const ChoiMatrix &cb : out.branch_maps) {
        if (cb.trace() < 1e-12) continue;
        if (!reference) {
            reference = &cb;
        } else if (choi_distance(reference->renormalized(), cb.renormalized()) > 1e-9) {
            out.deterministic = false;
        }
    }
    return out;
}

ProcessMap postselected_map(const Circuit &circuit) {
    const Circuit c = resolve_ctc_wires(circuit);
    return postselected_map(c, c.input_qubits(), c.output_qubits());
}

// ---------------------------------------------------------------------------
// Rewriting

std::vector<Gate> expand_to_j_cz(const Gate &gate) {
    auto with_control = [&](std::vector<Gate> gs) {
        if (gate.control) {
            for (Gate &g : gs) g.control = gate.control;
        }
        return gs;
    };
    const auto &t = gate.targets;
    switch (gate.kind) {
        case GateKind::J:
        case GateKind::CZ: return {gate};
        case GateKind::H: return with_control({Gate::j(t[0], 0)});
        case GateKind::X: return with_control({Gate::j(t[0], 0), Gate::j(t[0], kPi)});
        case GateKind::Z: return with_control({Gate::j(t[0], kPi), Gate::j(t[0], 0)});
        case GateKind::Y: return with_control({Gate::j(t[0], kPi), Gate::j(t[0], kPi)});
        case GateKind::S: return with_control({Gate::j(t[0], kPi / 2), Gate::j(t[0], 0)});
        case GateKind::Sdag: return with_control({Gate::j(t[0], -kPi / 2), Gate::j(t[0], 0)});
        case GateKind::C: return with_control({Gate::j(t[0], 0), Gate::j(t[0], kPi / 2)});
        case GateKind::Cdag: return with_control({Gate::j(t[0], 0), Gate::j(t[0], -kPi / 2)});
        case GateKind::CX: return with_control({Gate::j(t[1], 0), Gate::cz(t[0], t[1]), Gate::j(t[1], 0)});
        case GateKind::SWAP: {
            std::vector<Gate> out;
            for (auto [c, x] : {std::pair{t[0], t[1]}, std::pair{t[1], t[0]}, std::pair{t[0], t[1]}}) {
                for (Gate &g : expand_to_j_cz(Gate::cx(c, x))) out.push_back(g);
            }
            return with_control(std::move(out));
        }
        case GateKind::U: throw Error(ErrorCode::UnsupportedGate, "U gates have no J/CZ macro");
    }
    return {gate};
}

namespace {

bool is_plain_hadamard(const Event &ev, int *qubit) {
    auto g = std::get_if<Gate>(&ev);
    if (!g || g->control || g->kind != GateKind::J || g->theta != 0.0) return false;
    *qubit = g->targets[0];
    return true;
}

bool touches(const Event &ev, int q) {
    auto qs = event_qubits(ev);
    return std::find(qs.begin(), qs.end(), q) != qs.end();
}

// Removes pairs of uncontrolled J(0) that meet on a wire with nothing in between.
void cancel_hadamard_pairs(std::vector<Event> &timeline) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < timeline.size() && !changed; ++i) {
            int q = 0;
            if (!is_plain_hadamard(timeline[i], &q)) continue;
            for (std::size_t j = i + 1; j < timeline.size(); ++j) {
                if (!touches(timeline[j], q)) continue;
                int q2 = 0;
                if (is_plain_hadamard(timeline[j], &q2)) {
                    timeline.erase(timeline.begin() + static_cast<std::ptrdiff_t>(j));
                    timeline.erase(timeline.begin() + static_cast<std::ptrdiff_t>(i));
                    changed = true;
                }
                break;
            }
        }
    }
}

// Classically controlled X/Z stay as they are: they are pattern corrections.
bool is_pauli_correction(const Gate &g) {
    return g.control && (g.kind == GateKind::X || g.kind == GateKind::Z);
}

}  // namespace

Circuit rewrite_to_plus_form(const Circuit &circuit) {
    if (!circuit.has_bell_elements() && circuit.ctc_wires().empty()) return circuit;
    const Circuit c = resolve_ctc_wires(circuit);
    std::vector<Prep> preps = c.preps();
    std::vector<Event> timeline;
    for (std::size_t i = 0; i < c.timeline().size(); ++i) {
        const Event &ev = c.timeline()[i];
        if (auto b = std::get_if<BellPrep>(&ev)) {
            preps.push_back({b->first, PrepState::Plus});
            preps.push_back({b->second, PrepState::Plus});
            timeline.push_back(Gate::cz(b->first, b->second));
            timeline.push_back(Gate::j(b->second, 0));
        } else if (auto bm = std::get_if<BellMeasurement>(&ev)) {
            if (bm->postselect != 0) {
                throw Error(ErrorCode::UnsupportedBellOutcome, "only |beta_00> postselection is supported", i);
            }
            timeline.push_back(Gate::j(bm->second, 0));
            timeline.push_back(Gate::cz(bm->first, bm->second));
            for (int q : {bm->first, bm->second}) {
                Measurement m;
                m.qubit = q;
                m.basis = MeasureBasis::X;
                m.postselect = 0;
                timeline.push_back(m);
            }
        } else if (auto g = std::get_if<Gate>(&ev); g && g->kind != GateKind::U && !is_pauli_correction(*g)) {
            for (Gate &part : expand_to_j_cz(*g)) timeline.push_back(std::move(part));
        } else {
            timeline.push_back(ev);
        }
    }
    std::sort(preps.begin(), preps.end(), [](const Prep &a, const Prep &b) { return a.qubit < b.qubit; });
    cancel_hadamard_pairs(timeline);
    return Circuit(c.num_qubits(), std::move(preps), std::move(timeline));
}

}  // namespace ctcmbqc
