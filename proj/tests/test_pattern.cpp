#include <doctest.h>

#include <random>

#include "ctcmbqc/error.hpp"
#include "ctcmbqc/fixtures.hpp"
#include "ctcmbqc/pattern.hpp"
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

const ChoiMatrix &j_target() {
    static const ChoiMatrix c = choi_of_unitary(gates::j(-fixtures::kTheta));
    return c;
}

}  // namespace

TEST_SUITE("pattern") {

TEST_CASE("J pattern file parses to the expected commands") {
    Pattern p = parse_pattern(testing::read_data("j_gate.pattern"));
    CHECK(p.inputs() == std::vector<int>{1});
    CHECK(p.outputs() == std::vector<int>{2});
    const std::vector<Command> expected{Command::n(2), Command::e(1, 2), Command::m(1, fixtures::kTheta), Command::x(2, 1)};
    CHECK(p.commands() == expected);
    CHECK_FALSE(p.is_anachronical());
    CHECK(p.to_operator_string() == "X2^{s1} M1^{0.7} E12 N2");
}

TEST_CASE("data files match the fixtures") {
    CHECK(parse_pattern(testing::read_data("j_gate_anachronical.pattern")).commands() ==
          fixtures::j_pattern_anachronical().commands());
    Pattern four = parse_pattern(testing::read_data("four_qubit.pattern"));
    CHECK(four.commands() == fixtures::four_qubit_pattern().commands());
    CHECK(four.outputs() == fixtures::four_qubit_pattern().outputs());
}

TEST_CASE("anachronical pattern is flagged") {
    Pattern p = parse_pattern(testing::read_data("j_gate_anachronical.pattern"));
    CHECK(p.is_anachronical());
    CHECK(p.anachronical_signals() == std::vector<int>{1});
}

TEST_CASE("parse and validation errors") {
    try {
        (void)parse_pattern("inputs: 1\noutputs: 2\nN 2\nQ 1 2\n");
        FAIL("expected Parse");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(e.line() == 4u);
    }
    CHECK(code_of([] { (void)parse_pattern("inputs: 1\noutputs: 1\nN 2\nE 1 2\nM 1 theta=0\n"); }) == ErrorCode::Validation);
    CHECK(code_of([] { (void)parse_pattern("inputs: 1\noutputs: 2\nN 2\nN 2\nE 1 2\nM 1 theta=0\n"); }) == ErrorCode::Validation);
    CHECK(code_of([] { (void)parse_pattern("inputs: 1\noutputs: 2\nN 2\nE 1 2\nM 1 theta=0\nX 2 dep=s5\n"); }) ==
          ErrorCode::UnknownSignal);
    CHECK(code_of([] { (void)parse_pattern("inputs: 1\noutputs: 2\nN 2\nE 1 2\nM 1 theta=zero\n"); }) == ErrorCode::Parse);
}

TEST_CASE("comments and blank lines are ignored; text round trips") {
    Pattern p = parse_pattern("# header\ninputs: 1\n\noutputs: 2\nN 2  # fresh\nE 1 2\nM 1 theta=0.25\nX 2 dep=s1\n");
    CHECK(parse_pattern(p.to_string()).commands() == p.commands());
    CHECK(parse_pattern(fixtures::four_qubit_pattern().to_string()).commands() == fixtures::four_qubit_pattern().commands());
}

TEST_CASE("J pattern: two branches of 1/2 with output J(-theta) psi") {
    std::mt19937_64 rng(2);
    StateVector psi = random_state(1, rng);
    BranchSet bs = execute(fixtures::j_pattern(), psi);
    REQUIRE(bs.branches.size() == 2);
    StateVector expected(gates::j(-fixtures::kTheta) * psi.amplitudes());
    for (const Branch &b : bs.branches) {
        CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fidelity(b.state, expected) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("anachronical and time-respecting J patterns give the same branches up to phase") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 5; ++i) {
        StateVector psi = random_state(1, rng);
        BranchSet a = execute(fixtures::j_pattern(), psi);
        BranchSet b = execute(fixtures::j_pattern_anachronical(), psi);
        CHECK(b.total_probability() == doctest::Approx(1.0).epsilon(1e-10));
        REQUIRE(a.branches.size() == b.branches.size());
        for (std::size_t k = 0; k < a.branches.size(); ++k) {
            CHECK(a.branches[k].outcomes == b.branches[k].outcomes);
            CHECK(a.branches[k].probability == doctest::Approx(b.branches[k].probability).epsilon(1e-10));
            CHECK(fidelity(a.branches[k].state, b.branches[k].state) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("without its correction the J pattern splits into J and XJ") {
    Pattern bare({1}, {2}, {Command::n(2), Command::e(1, 2), Command::m(1, fixtures::kTheta)});
    ProcessMap pm = execute_map(bare);
    REQUIRE(pm.branch_maps.size() == 2);
    // Direct 4-dim simulation: project qubit 1 of CZ(psi (x) |+>) on <+-_theta|.
    Matrix cz = gates::cz();
    for (int s = 0; s < 2; ++s) {
        Vector bra = s == 0 ? StateVector::plus_theta(fixtures::kTheta).amplitudes()
                            : StateVector::minus_theta(fixtures::kTheta).amplitudes();
        Matrix kraus = Matrix::Zero(2, 2);
        for (int in = 0; in < 2; ++in) {
            Vector full = cz * tensor(StateVector::basis(1, in), StateVector::plus()).amplitudes();
            for (int out = 0; out < 2; ++out) kraus(out, in) = std::conj(bra(0)) * full(out) + std::conj(bra(1)) * full(2 + out);
        }
        std::vector<Matrix> k{kraus};
        CHECK(choi_distance(pm.branch_maps[s], choi_of_kraus(k, 1, 1)) < 1e-10);
    }
    CHECK(choi_distance(pm.branch_maps[0].renormalized(), j_target()) < 1e-10);
    CHECK(choi_distance(pm.branch_maps[1].renormalized(), choi_of_unitary(gates::x() * gates::j(-fixtures::kTheta))) < 1e-10);
    CHECK_FALSE(is_deterministic(bare).deterministic);
}

TEST_CASE("determinism") {
    DeterminismReport j = is_deterministic(fixtures::j_pattern());
    CHECK(j.deterministic);
    REQUIRE(j.map.has_value());
    CHECK(choi_distance(*j.map, j_target()) < 1e-10);
    CHECK(is_deterministic(fixtures::four_qubit_pattern()).deterministic);
    CHECK(is_deterministic(fixtures::j_pattern_anachronical()).deterministic);

    std::vector<Command> long_chain;
    for (int q = 2; q <= 14; ++q) long_chain.push_back(Command::n(q));
    for (int q = 1; q <= 13; ++q) long_chain.push_back(Command::e(q, q + 1));
    for (int q = 1; q <= 13; ++q) long_chain.push_back(Command::m(q, 0.1));
    Pattern big({1}, {14}, long_chain);
    CHECK(code_of([&] { (void)is_deterministic(big); }) == ErrorCode::BudgetExceeded);
}

TEST_CASE("stabilizers of the J resource") {
    auto ks = stabilizers_of_resource(fixtures::j_pattern());
    REQUIRE(ks.size() == 1);
    CHECK(ks[0].word == PauliString::parse("Z1X2"));
}

TEST_CASE("stabilizers of the four-qubit resource") {
    Pattern p = fixtures::four_qubit_pattern();
    CHECK(verify_stabilizer(p, PauliString::parse("X1Z3Z4")));
    CHECK(verify_stabilizer(p, PauliString::parse("X2Z3")));
    CHECK_FALSE(verify_stabilizer(p, PauliString::parse("X3Z1Z2Z4")));
    std::vector<std::string> words;
    for (const StabilizerOp &k : stabilizers_of_resource(p)) words.push_back(k.word.to_string());
    CHECK(words == std::vector<std::string>{"X1Z3Z4", "X2Z3", "Z1Z3X4"});

    // With qubit 4 an input, X4 words no longer stabilize every payload.
    Pattern two = fixtures::four_qubit_pattern_two_inputs();
    CHECK_FALSE(verify_stabilizer(two, PauliString::parse("Z1Z3X4")));
    CHECK(verify_stabilizer(two, PauliString::parse("X2Z3")));
}

TEST_CASE("(Z1 X2)^{s1} rewrite gives the anachronical J pattern") {
    Pattern r = apply_stabilizer_rewrite(fixtures::j_pattern(), PauliString::parse("Z1X2"), 1);
    CHECK(r.commands() == fixtures::j_pattern_anachronical().commands());
    Pattern back = apply_stabilizer_rewrite(r, PauliString::parse("Z1X2"), 1);
    CHECK(back.commands() == fixtures::j_pattern().commands());
}

TEST_CASE("K2^{s4} rewrite of the four-qubit pattern") {
    const double t3 = fixtures::kTheta3, t4 = fixtures::kTheta4;
    Pattern r = canonicalize(apply_stabilizer_rewrite(fixtures::four_qubit_pattern(), PauliString::parse("X2Z3"), 4));
    std::string expected = "X1^{s4} Z1^{s3} " + format_command_operator(Command::m(4, t4)) + " X4^{s3} " +
                           format_command_operator(Command::m(3, t3)) + " Z3^{s4}";
    CHECK(r.to_operator_string().rfind(expected, 0) == 0);
    CHECK(r.is_anachronical());
    CHECK(choi_distance(execute_map(r).choi, execute_map(fixtures::four_qubit_pattern()).choi) < 1e-10);
}

TEST_CASE("rewrite errors") {
    CHECK(code_of([] { (void)apply_stabilizer_rewrite(fixtures::j_pattern(), PauliString::parse("X1"), 1); }) ==
          ErrorCode::UnverifiedStabilizer);
    CHECK(code_of([] { (void)apply_stabilizer_rewrite(fixtures::j_pattern(), PauliString::parse("Z1X2"), 2); }) ==
          ErrorCode::UnknownSignal);
}

TEST_CASE("pattern to circuit preserves the map") {
    for (const Pattern &p : {fixtures::j_pattern(), fixtures::j_pattern_anachronical(), fixtures::four_qubit_pattern(),
                             fixtures::four_qubit_pattern_two_inputs()}) {
        Circuit c = pattern_to_circuit(p);
        CHECK(choi_distance(postselected_map(c).choi, execute_map(p).choi) < 1e-10);
    }
}

TEST_CASE("J pattern becomes the coherent J circuit") {
    Circuit c = pattern_to_circuit(fixtures::j_pattern());
    CHECK_FALSE(c.is_anachronical());
    bool has_cx = false, has_z_measure = false;
    for (const Event &ev : c.timeline()) {
        if (auto g = std::get_if<Gate>(&ev)) has_cx = has_cx || g->kind == GateKind::CX;
        if (auto m = std::get_if<Measurement>(&ev)) has_z_measure = has_z_measure || m->basis == MeasureBasis::Z;
    }
    CHECK(has_cx);
    CHECK(has_z_measure);
    CHECK(pattern_to_circuit(fixtures::j_pattern_anachronical()).is_anachronical());
    CHECK_FALSE(pattern_to_circuit(fixtures::four_qubit_pattern()).is_anachronical());
}

TEST_CASE("circuit to pattern") {
    Circuit cz(2, {}, {Gate::cz(1, 2)});
    Pattern e = circuit_to_pattern(cz);
    CHECK(e.commands() == std::vector<Command>{Command::e(1, 2)});

    Circuit post(1, {}, {Measurement{1, MeasureBasis::X, 0.0, 0}});
    Pattern p = circuit_to_pattern(post);
    CHECK(p.to_operator_string() == "M1^{0} Z1^{s1}");

    Circuit j(1, {}, {Gate::j(1, 0.4)});
    CHECK(choi_distance(execute_map(circuit_to_pattern(j)).choi, choi_of_unitary(gates::j(0.4))) < 1e-10);
    CHECK(code_of([] { (void)circuit_to_pattern(Circuit(1, {}, {Gate::unitary(gates::h(), {1})})); }) ==
          ErrorCode::UnsupportedGate);
}

TEST_CASE("standardize moves N and E to the front") {
    Pattern p({1}, {3}, {Command::n(2), Command::e(1, 2), Command::m(1, 0.2), Command::x(2, 1), Command::n(3),
                         Command::e(2, 3), Command::m(2, 0.5), Command::x(3, 2)});
    CHECK_FALSE(p.is_standard());
    Pattern s = standardize(p);
    CHECK(s.is_standard());
    CHECK(choi_distance(execute_map(s).choi, execute_map(p).choi) < 1e-10);
    CHECK(choi_distance(execute_map(s).choi, choi_of_unitary(gates::j(-0.5) * gates::j(-0.2))) < 1e-10);
}

}  // TEST_SUITE
