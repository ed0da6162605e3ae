#include "ctcmbqc/fixtures.hpp"

namespace ctcmbqc::fixtures {

Pattern j_pattern(double theta) {
    return Pattern({1}, {2}, {Command::n(2), Command::e(1, 2), Command::m(1, theta), Command::x(2, 1)});
}

Pattern j_pattern_anachronical(double theta) {
    return Pattern({1}, {2}, {Command::n(2), Command::e(1, 2), Command::z(1, 1), Command::m(1, theta)});
}

Circuit j_measured_circuit(double theta) {
    Measurement m;
    m.qubit = 1;
    m.basis = MeasureBasis::Theta;
    m.theta = theta;
    return Circuit(2, {{2, PrepState::Plus}},
                   {Gate::cz(1, 2), m, Gate::single(GateKind::X, 2).controlled_by(1, false)});
}

Circuit j_ctc_circuit(double theta) {
    std::vector<Event> timeline{Gate::cz(1, 2), Gate::cz(1, 3), Gate::j(1, -theta)};
    return Circuit(3, {{2, PrepState::Plus}}, std::move(timeline), {CtcWire{2, 1, 1, 3}});
}

namespace {

std::vector<Command> four_qubit_body(double theta3, double theta4) {
    return {Command::e(3, 4),        Command::e(1, 4),        Command::e(1, 3),      Command::e(2, 3),
            Command::m(3, theta3),   Command::x(4, 3),        Command::m(4, theta4), Command::z(1, 3),
            Command::x(1, 4),        Command::x(2, 4)};
}

}  // namespace

Pattern four_qubit_pattern(double theta3, double theta4) {
    std::vector<Command> cmds{Command::n(2), Command::n(1), Command::n(4)};
    for (const Command &c : four_qubit_body(theta3, theta4)) cmds.push_back(c);
    return Pattern({3}, {1, 2}, std::move(cmds));
}

Pattern four_qubit_pattern_two_inputs(double theta3, double theta4) {
    std::vector<Command> cmds{Command::n(2), Command::n(1)};
    for (const Command &c : four_qubit_body(theta3, theta4)) cmds.push_back(c);
    return Pattern({3, 4}, {1, 2}, std::move(cmds));
}

CtcSpec j_loop_spec(double theta) { return CtcSpec(1, std::vector<Gate>{Gate::cz(1, 2), Gate::j(1, -theta)}); }

CtcSpec embedded_j_loop_spec(double theta) {
    CtcEmbedding e;
    e.qubits = 2;
    e.preps = {{2, PrepState::Plus}};
    e.before = {Gate::cz(1, 2)};
    e.v_wires = {1};
    return CtcSpec(1, std::vector<Gate>{Gate::cz(1, 2), Gate::j(1, -theta)}, e);
}

std::pair<OpenGraph, MeasurementPlan> reduction_graph(double theta) {
    OpenGraph g({1, 2, 3, 4, 5}, {{3, 4}, {3, 5}, {2, 3}, {1, 5}, {1, 2}}, {3}, {2, 4});
    MeasurementPlan plan;
    PlanEntry e1{1, PlanBasis::X, 0.0, {}};
    PlanEntry e5{5, PlanBasis::X, 0.0, {}};
    PlanEntry e3{3, PlanBasis::Theta, theta, {}};
    plan.entries = {e1, e5, e3};
    return {g, plan};
}

OpenGraph star_graph() { return OpenGraph({1, 2, 3}, {{1, 2}, {1, 3}}, {}, {1, 2, 3}); }

}  // namespace ctcmbqc::fixtures
