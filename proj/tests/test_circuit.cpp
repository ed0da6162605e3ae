#include <doctest.h>

#include <random>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/ctc.hpp"
#include "ctcmbqc/error.hpp"
#include "ctcmbqc/fixtures.hpp"
#include "support.hpp"

using namespace ctcmbqc;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

Matrix output_density(const BranchSet &bs) {
    const Eigen::Index d = Eigen::Index(1) << bs.output_qubits.size();
    Matrix rho = Matrix::Zero(d, d);
    for (const Branch &b : bs.branches) rho += b.state.amplitudes() * b.state.amplitudes().adjoint();
    return rho;
}

}  // namespace

TEST_SUITE("circuit") {

TEST_CASE("measured J circuit parses with the expected events") {
    Circuit c = parse_circuit(testing::read_data("j_measured.json"));
    CHECK(c.num_qubits() == 2);
    REQUIRE(c.timeline().size() == 3);
    CHECK(std::get<Gate>(c.timeline()[0]).kind == GateKind::CZ);
    const auto &m = std::get<Measurement>(c.timeline()[1]);
    CHECK(m.basis == MeasureBasis::Theta);
    CHECK(m.theta == doctest::Approx(fixtures::kTheta));
    const auto &x = std::get<Gate>(c.timeline()[2]);
    CHECK(x.kind == GateKind::X);
    REQUIRE(x.control.has_value());
    CHECK(x.control->signal == 1);
    CHECK(c.input_qubits() == std::vector<int>{1});
    CHECK(c.output_qubits() == std::vector<int>{2});
}

TEST_CASE("data files match the fixtures") {
    CHECK(serialize_circuit(parse_circuit(testing::read_data("j_measured.json"))) ==
          serialize_circuit(fixtures::j_measured_circuit()));
    CHECK(serialize_circuit(parse_circuit(testing::read_data("j_ctc.json"))) == serialize_circuit(fixtures::j_ctc_circuit()));
    CHECK(serialize_circuit(parse_circuit(testing::read_data("embedded_j_loop.bss.json"))) ==
          serialize_circuit(build_bss_circuit(fixtures::embedded_j_loop_spec())));
}

TEST_CASE("empty timeline on one qubit is the identity") {
    Circuit c = parse_circuit(R"({"qubits": 1, "preps": [], "timeline": []})");
    CHECK(choi_distance(postselected_map(c).choi, choi_of_unitary(gates::identity())) < 1e-12);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        (void)parse_circuit("{\n  \"qubits\": 1,\n  \"timeline\": [,]\n}");
        FAIL("expected a parse error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(e.line() == 3u);
        REQUIRE(e.column().has_value());
        CHECK(*e.column() > 0u);
    }
}

TEST_CASE("semantic errors carry the event index") {
    const char *non_unitary = R"({"qubits": 1, "timeline": [{"gate": "H", "targets": [1]},
        {"gate": "U", "targets": [1], "matrix": [[1, 1], [0, 1]]}]})";
    try {
        (void)parse_circuit(non_unitary);
        FAIL("expected NonUnitary");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::NonUnitary);
        CHECK(e.event() == 1u);
    }
    try {
        (void)parse_circuit(R"({"qubits": 1, "timeline": [{"gate": "CZ", "targets": [1, 2]}]})");
        FAIL("expected Validation");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::Validation);
        CHECK(e.event() == 0u);
    }
    CHECK(code_of([] { (void)parse_circuit(R"({"qubits": 1, "timeline": [{"gate": "T", "targets": [1]}]})"); }) ==
          ErrorCode::UnsupportedGate);
    CHECK(code_of([] {
              (void)parse_circuit(R"({"qubits": 1, "timeline": [{"gate": "X", "targets": [1], "control": {"signal": 4}}]})");
          }) == ErrorCode::UnknownSignal);
}

TEST_CASE("a misflagged classical control is rejected") {
    // s1 is measured after the gate, so the control must be flagged anachronical.
    const char *text = R"({"qubits": 2, "preps": [{"q": 2, "state": "plus"}], "timeline": [
        {"gate": "Z", "targets": [1], "control": {"signal": 1, "anachronical": false}},
        {"measure": {"q": 1, "basis": "X"}}]})";
    CHECK(code_of([&] { (void)parse_circuit(text); }) == ErrorCode::Validation);
}

TEST_CASE("round trip through JSON") {
    for (const Circuit &c : {fixtures::j_measured_circuit(0.3), fixtures::j_ctc_circuit(1.2),
                             build_bss_circuit(fixtures::embedded_j_loop_spec(0.5))}) {
        std::string text = serialize_circuit(c);
        CHECK(serialize_circuit(parse_circuit(text)) == text);
    }
}

TEST_CASE("measured J circuit: two branches of 1/2, both J(-theta) psi") {
    std::mt19937_64 rng(11);
    StateVector psi = random_state(1, rng);
    BranchSet bs = simulate(fixtures::j_measured_circuit(), psi);
    REQUIRE(bs.branches.size() == 2);
    StateVector expected(gates::j(-fixtures::kTheta) * psi.amplitudes());
    for (const Branch &b : bs.branches) {
        CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fidelity(b.state, expected) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(bs.branches[0].outcomes == std::vector<std::pair<int, int>>{{1, 0}});
    CHECK(bs.branches[1].outcomes == std::vector<std::pair<int, int>>{{1, 1}});
}

TEST_CASE("Z measurement of |+> splits evenly") {
    Circuit c(1, {{1, PrepState::Plus}}, {Measurement{1, MeasureBasis::Z, 0.0, std::nullopt}});
    BranchSet bs = simulate(c, StateVector());
    REQUIRE(bs.branches.size() == 2);
    CHECK(bs.branches[0].probability == doctest::Approx(0.5));
    CHECK(bs.branches[1].probability == doctest::Approx(0.5));
}

TEST_CASE("each branch norm equals its probability and the total is 1") {
    Circuit c = fixtures::j_measured_circuit(1.9);
    for (int seed : testing::kSeeds) {
        std::mt19937_64 rng(seed);
        BranchSet bs = simulate(c, random_state(1, rng));
        CHECK(bs.total_probability() == doctest::Approx(1.0).epsilon(1e-10));
        for (const Branch &b : bs.branches) CHECK(std::abs(b.state.norm_squared() - b.probability) < 1e-12);
    }
}

TEST_CASE("simulate refuses anachronical content, simulate_consistent agrees elsewhere") {
    Circuit anach = pattern_to_circuit(fixtures::j_pattern_anachronical());
    CHECK(code_of([&] { (void)simulate(anach, StateVector::plus()); }) == ErrorCode::RequiresConsistencySemantics);
    CHECK(code_of([&] { (void)simulate(fixtures::j_ctc_circuit(), StateVector::plus()); }) ==
          ErrorCode::RequiresConsistencySemantics);

    std::mt19937_64 rng(4);
    StateVector psi = random_state(1, rng);
    Circuit c = fixtures::j_measured_circuit();
    BranchSet a = simulate(c, psi), b = simulate_consistent(c, psi);
    REQUIRE(a.branches.size() == b.branches.size());
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        CHECK(a.branches[i].outcomes == b.branches[i].outcomes);
        CHECK(a.branches[i].probability == b.branches[i].probability);
        CHECK(a.branches[i].state.amplitudes() == b.branches[i].state.amplitudes());
    }
}

TEST_CASE("anachronical circuit: consistent branches give J(-theta) psi with total probability 1") {
    Circuit anach = pattern_to_circuit(fixtures::j_pattern_anachronical());
    std::mt19937_64 rng(8);
    StateVector psi = random_state(1, rng);
    BranchSet bs = simulate_consistent(anach, psi);
    CHECK(bs.total_probability() == doctest::Approx(1.0).epsilon(1e-10));
    StateVector expected(gates::j(-fixtures::kTheta) * psi.amplitudes());
    for (const Branch &b : bs.branches) CHECK(fidelity(b.state, expected) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("postselected map is linear") {
    for (const Circuit &c : {fixtures::j_measured_circuit(), build_bss_circuit(fixtures::j_loop_spec())}) {
        ProcessMap pm = postselected_map(c);
        std::mt19937_64 rng(21);
        for (int i = 0; i < 20; ++i) {
            StateVector psi = random_state(1, rng);
            Matrix direct = output_density(simulate_consistent(c, psi));
            Matrix from_choi = pm.choi.apply(DensityMatrix::pure(psi).matrix());
            CHECK((direct - from_choi).norm() < 1e-9);
        }
    }
}

TEST_CASE("measured J circuit maps to J(-theta), trace preserving") {
    ProcessMap pm = postselected_map(fixtures::j_measured_circuit());
    CHECK(choi_distance(pm.choi, choi_of_unitary(gates::j(-fixtures::kTheta))) < 1e-10);
    CHECK(pm.deterministic);
    CHECK((pm.choi.input_marginal() - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("BSS loop map is rank one, subnormalized by 1/4") {
    // |psi> -> (alpha + e^{-i theta} beta)/2 |+>.
    const double th = fixtures::kTheta;
    Matrix k(2, 2);
    const double r = 1 / std::sqrt(2.0);
    k << r / 2, r / 2 * std::exp(Complex(0, -th)), r / 2, r / 2 * std::exp(Complex(0, -th));
    std::vector<Matrix> kraus{k};
    ProcessMap pm = postselected_map(build_bss_circuit(fixtures::j_loop_spec(th)));
    CHECK(choi_distance(pm.choi, choi_of_kraus(kraus, 1, 1)) < 1e-10);
    CHECK(pm.choi.trace() == doctest::Approx(0.5));
}

TEST_CASE("plus-form rewrite") {
    Circuit plain = fixtures::j_measured_circuit();
    CHECK(serialize_circuit(rewrite_to_plus_form(plain)) == serialize_circuit(plain));

    for (const CtcSpec &spec : {fixtures::j_loop_spec(), fixtures::embedded_j_loop_spec(), CtcSpec(1, std::vector<Gate>{})}) {
        Circuit bss = build_bss_circuit(spec);
        Circuit plus = rewrite_to_plus_form(bss);
        CHECK_FALSE(plus.has_bell_elements());
        for (const Event &ev : plus.timeline()) {
            if (auto g = std::get_if<Gate>(&ev)) CHECK((g->kind == GateKind::J || g->kind == GateKind::CZ));
        }
        CHECK(choi_distance(postselected_map(plus).choi, postselected_map(bss).choi) < 1e-10);
    }

    Circuit odd(2, {}, {BellMeasurement{1, 2, 3}});
    CHECK(code_of([&] { (void)rewrite_to_plus_form(odd); }) == ErrorCode::UnsupportedBellOutcome);
}

TEST_CASE("J/CZ macros reproduce the named gates") {
    for (GateKind k : {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::S, GateKind::Sdag, GateKind::C,
                       GateKind::Cdag}) {
        std::vector<Event> tl;
        for (const Gate &g : expand_to_j_cz(Gate::single(k, 1))) tl.push_back(g);
        Circuit expanded(1, {}, tl);
        CHECK(choi_distance(postselected_map(expanded).choi, choi_of_unitary(Gate::single(k, 1).unitary_matrix())) < 1e-10);
    }
    for (const Gate &two : {Gate::cx(1, 2), Gate::cx(2, 1), Gate::swap(1, 2)}) {
        std::vector<Event> tl;
        for (const Gate &g : expand_to_j_cz(two)) tl.push_back(g);
        Matrix expected = embed_operator(two.unitary_matrix(), 2, two.targets);
        CHECK(choi_distance(postselected_map(Circuit(2, {}, tl)).choi, choi_of_unitary(expected)) < 1e-10);
    }
    CHECK(code_of([] { (void)expand_to_j_cz(Gate::unitary(gates::h(), {1})); }) == ErrorCode::UnsupportedGate);
}

TEST_CASE("CTC wire is resolved into a Bell pair and a postselection") {
    Circuit loop = fixtures::j_ctc_circuit();
    Circuit resolved = resolve_ctc_wires(loop);
    CHECK(resolved.ctc_wires().empty());
    CHECK(resolved.has_bell_elements());
    CHECK(resolved.num_qubits() == loop.num_qubits() + 1);
}

}  // TEST_SUITE
