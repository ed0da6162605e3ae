// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; the exit code is nonzero when any selected criterion fails.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include "ctcmbqc/fixtures.hpp"
#include "ctcmbqc/report.hpp"
#include "properties.hpp"

using namespace ctcmbqc;

namespace {

struct Verdict {
    bool passed = true;
    std::string detail;
};

class Tally {
   public:
    /// Records observed <= bound.
    void at_most(const std::string &what, double observed, double bound) {
        if (!(observed <= bound)) fail(what + " = " + format12(observed) + " > " + format12(bound));
        else notes_.push_back(what + " " + format12(observed));
    }
    void require(const std::string &what, bool ok, const std::string &observed = "") {
        if (!ok) fail(what + (observed.empty() ? "" : " (got " + observed + ")"));
    }
    Verdict verdict() const {
        std::string d;
        const auto &src = failures_.empty() ? notes_ : failures_;
        for (std::size_t i = 0; i < src.size(); ++i) d += (i ? "; " : "") + src[i];
        return {failures_.empty(), d};
    }

   private:
    void fail(std::string s) { failures_.push_back(std::move(s)); }
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

double bloch_gap(const BlochVector &a, const BlochVector &b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

std::string bloch_text(const BlochVector &b) { return "(" + format12(b.x) + "," + format12(b.y) + "," + format12(b.z) + ")"; }

std::vector<DensityMatrix> grid_states() {
    std::vector<DensityMatrix> out;
    for (const BlochVector &b : bloch_grid62()) out.push_back(to_density(b));
    return out;
}

ChoiMatrix j_choi(double th) { return choi_of_unitary(gates::j(-th)); }

ChoiMatrix plus_times_j(double th) {
    std::vector<Matrix> k{Eigen::kroneckerProduct(StateVector::plus().amplitudes(), gates::j(-th)).eval()};
    return choi_of_kraus(k, 1, 2);
}

Verdict bss_closed_form() {
    Tally t;
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    double p_err = 0, f_err = 0;
    for (int i = 0; i < 50; ++i) {
        const double th = angle(rng);
        StateVector psi = random_state(1, rng);
        BssResult r = bss_simulate(fixtures::j_loop_spec(th), psi);
        const double p = std::norm(psi[0] + std::exp(Complex(0, -th)) * psi[1]) / 4;
        p_err = std::max(p_err, std::abs(r.success_probability - p));
        if (r.success_probability > 1e-12) f_err = std::max(f_err, 1 - fidelity(*r.output_state, StateVector::plus()));
    }
    t.at_most("max |p - closed form|", p_err, 1e-10);
    t.at_most("max 1 - F(out, |+>)", f_err, 1e-10);
    return t.verdict();
}

Verdict grandfather() {
    Tally t;
    const double th = fixtures::kTheta;
    BssResult r = bss_simulate(fixtures::j_loop_spec(th), StateVector::minus_theta(th));
    t.at_most("p(|-_theta>)", r.success_probability, 1e-12);
    t.require("grandfather paradox flagged", r.grandfather_paradox && !r.output_state);
    return t.verdict();
}

Verdict triple_equivalence() {
    Tally t;
    const double th = fixtures::kTheta;
    t.at_most("measured circuit", choi_distance(postselected_map(fixtures::j_measured_circuit(th)).choi, j_choi(th)), 1e-10);
    t.at_most("coherent circuit", choi_distance(postselected_map(pattern_to_circuit(fixtures::j_pattern(th))).choi, j_choi(th)),
              1e-10);
    t.at_most("pattern", choi_distance(execute_map(fixtures::j_pattern(th)).choi, j_choi(th)), 1e-10);
    return t.verdict();
}

Verdict anachronical_consistency() {
    Tally t;
    const double th = fixtures::kTheta;
    Pattern p = fixtures::j_pattern_anachronical(th);
    Circuit c = pattern_to_circuit(p);
    t.require("circuit carries an anachronical control", c.is_anachronical());
    ChoiMatrix pm = execute_map(p).choi, cm = postselected_map(c).choi;
    t.at_most("pattern vs circuit", choi_distance(pm, cm), 1e-10);
    t.at_most("pattern vs J(-theta)", choi_distance(pm, j_choi(th)), 1e-10);
    std::mt19937_64 rng(0);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        StateVector psi = random_state(1, rng);
        worst = std::max(worst, std::abs(execute(p, psi).total_probability() - 1));
        worst = std::max(worst, std::abs(simulate_consistent(c, psi).total_probability() - 1));
    }
    t.at_most("max |total consistent probability - 1|", worst, 1e-10);
    return t.verdict();
}

Verdict embedded_bss() {
    Tally t;
    // Brute-force value, locked: every input succeeds with probability 1/4.
    constexpr double kLockedSuccess = 0.25;
    const double th = fixtures::kTheta;
    Circuit c = build_bss_circuit(fixtures::embedded_j_loop_spec(th));
    std::mt19937_64 rng(0);
    double f_err = 0, p_err = 0;
    for (int i = 0; i < 20; ++i) {
        StateVector psi = random_state(1, rng);
        BranchSet bs = simulate(c, psi);
        if (bs.branches.size() != 1) {
            t.require("single postselected branch", false, std::to_string(bs.branches.size()));
            break;
        }
        StateVector expected = tensor(StateVector::plus(), StateVector(gates::j(-th) * psi.amplitudes()));
        f_err = std::max(f_err, 1 - fidelity(bs.branches[0].state, expected));
        p_err = std::max(p_err, std::abs(bs.total_probability() - kLockedSuccess));
    }
    t.at_most("max 1 - F(out, |+> (x) J psi)", f_err, 1e-10);
    t.at_most("max |p - 0.25|", p_err, 1e-10);
    return t.verdict();
}

Verdict second_example() {
    Tally t;
    Pattern p = fixtures::four_qubit_pattern();
    t.require("pattern deterministic", is_deterministic(p).deterministic);
    const ChoiMatrix base = execute_map(p).choi;
    double worst = 0;
    int n = 0;
    for (const StabilizerOp &k : stabilizers_of_resource(p)) {
        for (int s : p.signals()) {
            worst = std::max(worst, choi_distance(execute_map(apply_stabilizer_rewrite(p, k.word, s)).choi, base));
            ++n;
        }
    }
    t.require("verified stabilizers found", n > 0);
    t.at_most("max map change over " + std::to_string(n) + " rewrites", worst, 1e-9);
    Pattern k2 = apply_stabilizer_rewrite(p, PauliString::parse("X2Z3"), 4);
    Circuit rewritten = pattern_to_circuit(k2);
    t.require("K2-rewritten circuit is anachronical", rewritten.is_anachronical());
    t.at_most("rewritten circuit vs time-respecting circuit",
              choi_distance(postselected_map(rewritten).choi, postselected_map(pattern_to_circuit(p)).choi), 1e-9);
    return t.verdict();
}

Verdict appendix_pipeline() {
    Tally t;
    const double th = fixtures::kTheta;
    CtcSimulation sim = deterministic_ctc_simulation(build_bss_circuit(fixtures::embedded_j_loop_spec(th)));
    std::string log;
    for (std::size_t i = 0; i < sim.log.size(); ++i) log += (i ? ", " : "") + sim.log[i].to_string();
    t.require("rewrite log LC 5, LC 1, ZDEL 1, LC 5, ZDEL 5", log == "LC 5, LC 1, ZDEL 1, LC 5, ZDEL 5", log);
    // Operator order M3^theta Z3^{s3}: Z3^{s3} executes first.
    std::vector<Command> tail;
    for (const Command &c : sim.pattern.commands()) {
        if (c.kind != CommandKind::N && c.kind != CommandKind::E) tail.push_back(c);
    }
    t.require("final commands M3^theta Z3^{s3}", tail == std::vector<Command>{Command::z(3, 3), Command::m(3, th)},
              sim.pattern.to_operator_string());
    t.require("single edge 3-4", sim.pattern.edges() == std::vector<std::pair<int, int>>{{3, 4}});
    const auto &outs = sim.pattern.outputs();
    bool isolated = std::find(outs.begin(), outs.end(), 2) != outs.end();
    for (auto [a, b] : sim.pattern.edges()) isolated = isolated && a != 2 && b != 2;
    t.require("qubit 2 isolated", isolated);
    t.at_most("map vs |+> (x) J(-theta)", choi_distance(execute_map(sim.pattern).choi, plus_times_j(th)), 1e-10);
    return t.verdict();
}

Verdict lc_fixture() {
    Tally t;
    OpenGraph star = fixtures::star_graph();
    OpenGraph tri = local_complement(star, 1);
    t.require("triangle edges", tri.edges() == std::set<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});
    const std::vector<std::pair<const char *, const char *>> transport{{"X1Z2Z3", "X1Z2Z3"}, {"Z1X2", "Y1Y2"}, {"Z1X3", "Y1Y3"}};
    for (const auto &[f, g] : transport) {
        PauliString img = conjugate(PauliString::parse(f), tri.decorations());
        t.require(std::string(f) + " -> " + g, img == PauliString::parse(g), img.to_string());
    }
    Vector empty = Vector::Ones(1);
    Vector moved = lc_unitary(star, 1) * star.graph_state(empty);
    t.at_most("|| U_LC|star> - |triangle> ||", (moved - tri.graph_state(empty)).norm(), 1e-10);
    return t.verdict();
}

Verdict deutsch_consistency() {
    Tally t;
    const double th = fixtures::kTheta;
    CtcSpec spec = fixtures::j_loop_spec(th);
    double residual = 0, m_err = 0, r_err = 0;
    int max_dim = 0;
    for (const BlochVector &n : bloch_grid62()) {
        DensityMatrix rho_in = to_density(n);
        Matrix phi = deutsch_superoperator(spec, rho_in);
        DeutschSolution s = deutsch_fixed_points(spec, rho_in);
        residual = std::max(residual, fixed_point_residual(phi, s.canonical_rho_ctc.matrix()));
        for (const DensityMatrix &e : s.extremal_rho_ctc) residual = std::max(residual, fixed_point_residual(phi, e.matrix()));
        m_err = std::max(m_err, bloch_gap(to_bloch(s.canonical_rho_ctc), {n.z, 0, 0}));
        r_err = std::max(r_err, bloch_gap(to_bloch(s.canonical_rho_out), {n.z * n.z, 0, 0}));
        max_dim = std::max(max_dim, s.family_dimension());
    }
    t.at_most("max fixed-point residual", residual, 1e-9);
    t.at_most("max |m - (n_z,0,0)|", m_err, 1e-9);
    t.at_most("max |r - (n_z^2,0,0)|", r_err, 1e-9);
    DensityMatrix special = DensityMatrix::pure(StateVector::plus_theta(th));
    DeutschSolution s = deutsch_fixed_points(spec, special);
    t.require("no second family on the grid", max_dim == 0, std::to_string(max_dim));
    t.require("second family at |+_theta>", s.family_dimension() == 1, std::to_string(s.family_dimension()));
    if (s.family_dimension() == 1) {
        BlochVector dir = to_bloch(s.fixed_point_basis[0]);
        t.require("family along m_z", std::abs(dir.x) < 1e-9 && std::abs(dir.y) < 1e-9, bloch_text(dir));
        Matrix phi = deutsch_superoperator(spec, special);
        for (std::size_t i = 0; i < s.extremal_rho_ctc.size(); ++i) {
            t.at_most("extremal residual", fixed_point_residual(phi, s.extremal_rho_ctc[i].matrix()), 1e-9);
            t.at_most("rho_ctc - rho_out", (s.extremal_rho_ctc[i].matrix() - s.extremal_rho_out[i].matrix()).norm(), 1e-9);
        }
    }
    return t.verdict();
}

Verdict extended_deutsch() {
    Tally t;
    CtcSpec spec = fixtures::embedded_j_loop_spec();
    const int ancilla[1] = {1};
    double m_err = 0, a_err = 0;
    for (const BlochVector &n : bloch_grid62()) {
        DeutschSolution s = deutsch_fixed_points(spec, to_density(n));
        m_err = std::max(m_err, bloch_gap(to_bloch(s.canonical_rho_ctc), {n.z, 0, 0}));
        a_err = std::max(a_err, bloch_gap(to_bloch(partial_trace(s.canonical_rho_out.matrix(), 2, ancilla)), {n.z * n.z, 0, 0}));
    }
    t.at_most("max |m - (n_z,0,0)|", m_err, 1e-9);
    t.at_most("max |a - (n_z^2,0,0)|", a_err, 1e-9);
    return t.verdict();
}

Verdict conflict_report() {
    Tally t;
    ConflictReport rep = compare_models(fixtures::j_loop_spec(), grid_states(), 1e-9);
    std::string agree;
    for (std::size_t i : rep.agreement) agree += (agree.empty() ? "" : " ") + bloch_text(rep.rows[i].input_bloch);
    t.require("agreement only at |0>", rep.agreement == std::vector<std::size_t>{0}, agree.empty() ? "none" : agree);
    bool any_grandfather = false;
    for (const ConflictRow &row : rep.rows) any_grandfather = any_grandfather || row.grandfather;
    t.require("no grandfather points on the grid", !any_grandfather);
    const ConflictRow &zero = rep.rows[0];
    t.at_most("|0>: BSS output vs |+>", bloch_gap(zero.bss_bloch, {1, 0, 0}), 1e-9);
    t.at_most("|0>: Deutsch output vs |+>", bloch_gap(zero.deutsch_bloch, {1, 0, 0}), 1e-9);
    return t.verdict();
}

Verdict purity_property() {
    Tally t;
    std::mt19937_64 rng(0);
    double worst = 0;
    int successes = 0;
    for (int i = 0; i < 100; ++i) {
        CtcSpec spec(1, random_unitary(2, rng));
        BssResult r = bss_simulate(spec, random_state(1, rng));
        if (r.grandfather_paradox) continue;
        ++successes;
        worst = std::max(worst, 1 - DensityMatrix::pure(*r.output_state).purity());
    }
    t.at_most("max 1 - BSS purity over " + std::to_string(successes) + " successes", worst, 1e-10);
    double min_purity = 1;
    for (const DensityMatrix &rho : grid_states()) {
        min_purity = std::min(min_purity, deutsch_fixed_points(fixtures::j_loop_spec(), rho).canonical_rho_out.purity());
    }
    t.require("some Deutsch output mixed", min_purity < 1 - 1e-3, format12(min_purity));
    t.at_most("min Deutsch purity", min_purity, 1 - 1e-3);
    return t.verdict();
}

Verdict property_suites() {
    Tally t;
    for (std::uint64_t seed : {0, 1, 2}) {
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        for (const auto &[name, fn] : std::vector<std::pair<std::string, std::function<properties::Outcome(std::uint64_t)>>>{
                 {"Choi metric", properties::choi_metric_axioms},
                 {"LC involution", properties::lc_involution},
                 {"stabilizer rewrites", properties::stabilizer_rewrite_invariance},
                 {"branch normalization", properties::branch_normalization}}) {
            properties::Outcome o = fn(seed);
            t.require(name + tag, o.passed, o.detail);
        }
    }
    Verdict v = t.verdict();
    if (v.passed) v.detail = "4 properties x seeds {0, 1, 2}";
    return v;
}

struct Criterion {
    int id;
    const char *name;
    Verdict (*run)();
};

const Criterion kCriteria[] = {
    {1, "BSS closed form", bss_closed_form},
    {2, "grandfather paradox", grandfather},
    {3, "triple equivalence", triple_equivalence},
    {4, "anachronical consistency", anachronical_consistency},
    {5, "embedded BSS", embedded_bss},
    {6, "second example", second_example},
    {7, "appendix pipeline", appendix_pipeline},
    {8, "LC fixture", lc_fixture},
    {9, "Deutsch consistency", deutsch_consistency},
    {10, "extended Deutsch", extended_deutsch},
    {11, "conflict report", conflict_report},
    {12, "purity property", purity_property},
    {13, "property suites", property_suites},
};

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-13)")->check(CLI::Range(1, 13));
    CLI11_PARSE(app, argc, argv);

    bool all_passed = true;
    for (const Criterion &c : kCriteria) {
        if (only && c.id != only) continue;
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        all_passed = all_passed && v.passed;
        std::cout << (v.passed ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << v.detail << "\n";
    }
    return all_passed ? 0 : 1;
}
