#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ctcmbqc/fixtures.hpp"
#include "ctcmbqc/report.hpp"

using namespace ctcmbqc;

namespace properties {

namespace {

class Worst {
   public:
    explicit Worst(double tol) : tol_(tol) {}
    void observe(double violation) { worst_ = std::max(worst_, violation); }
    void fail(std::string why) {
        if (note_.empty()) note_ = std::move(why);
    }
    Outcome outcome() const {
        if (!note_.empty()) return {false, note_};
        return {worst_ <= tol_, "max violation " + format12(worst_)};
    }

   private:
    double tol_;
    double worst_ = 0.0;
    std::string note_;
};

// Random single-qubit channel: a unitary dilation on (system, environment) traced over the environment.
ChoiMatrix random_channel(std::mt19937_64 &rng) {
    Matrix u = random_unitary(2, rng);
    std::vector<Matrix> kraus;
    for (int e = 0; e < 2; ++e) {
        Matrix k(2, 2);
        for (int out = 0; out < 2; ++out) {
            for (int in = 0; in < 2; ++in) k(out, in) = u(2 * out + e, 2 * in);
        }
        kraus.push_back(k);
    }
    return choi_of_kraus(kraus, 1, 1);
}

OpenGraph random_graph(std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> size(3, 6);
    std::bernoulli_distribution coin(0.5);
    const int n = size(rng);
    std::set<int> vertices;
    std::set<std::pair<int, int>> edges;
    for (int v = 1; v <= n; ++v) vertices.insert(v);
    for (int a = 1; a <= n; ++a) {
        for (int b = a + 1; b <= n; ++b) {
            if (coin(rng)) edges.insert({a, b});
        }
    }
    std::vector<int> inputs;
    if (coin(rng)) inputs.push_back(1);
    return OpenGraph(vertices, edges, inputs, {n});
}

Vector random_payload(std::size_t inputs, std::mt19937_64 &rng) {
    if (inputs == 0) return Vector::Ones(1);
    return random_state(static_cast<int>(inputs), rng).amplitudes();
}

std::vector<Pattern> fixture_patterns() {
    return {fixtures::j_pattern(), fixtures::j_pattern(1.9), fixtures::four_qubit_pattern(),
            fixtures::four_qubit_pattern_two_inputs(), fixtures::four_qubit_pattern(2.2, -0.4)};
}

}  // namespace

Outcome choi_metric_axioms(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w(1e-10);
    for (int i = 0; i < 20; ++i) {
        ChoiMatrix a = random_channel(rng), b = random_channel(rng), c = random_channel(rng);
        const double ab = choi_distance(a, b), ba = choi_distance(b, a), bc = choi_distance(b, c), ac = choi_distance(a, c);
        w.observe(choi_distance(a, a));
        w.observe(std::abs(ab - ba));
        w.observe(ac - (ab + bc));
        if (ab < 1e-6) w.fail("two random channels at distance " + format12(ab));
    }
    return w.outcome();
}

Outcome lc_involution(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w(1e-10);
    for (int i = 0; i < 20; ++i) {
        OpenGraph g = random_graph(rng);
        std::vector<int> candidates;
        for (int v : g.vertices()) {
            if (!g.is_input(v)) candidates.push_back(v);
        }
        const int v = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        OpenGraph once = local_complement(g, v);
        OpenGraph twice = local_complement(once, v);
        if (twice.edges() != g.edges()) w.fail("edges not restored after LC twice at " + std::to_string(v));
        if (once.vertices() != g.vertices()) w.fail("LC changed the vertex set");

        if (!is_unitary(lc_unitary(once, v) * lc_unitary(g, v), 1e-12)) w.fail("composed LC is not unitary");
        for (int u : g.vertices()) {
            if (!is_unitary(twice.decoration(u).matrix(), 1e-12)) w.fail("decoration is not unitary");
        }

        Vector payload = random_payload(g.inputs().size(), rng);
        Vector moved = lc_unitary(g, v) * g.graph_state(payload);
        w.observe(1.0 - fidelity(StateVector(moved), StateVector(once.graph_state(payload))));
        w.observe(1.0 - fidelity(StateVector(once.frame_state(payload)), StateVector(g.frame_state(payload))));

        for (int u : candidates) {
            if (g.is_output(u)) continue;
            OpenGraph cut = z_delete(g, u);
            if (cut.vertices().size() > g.vertices().size() || cut.edges().size() > g.edges().size()) {
                w.fail("Z deletion grew the graph");
            }
        }
    }
    return w.outcome();
}

Outcome stabilizer_rewrite_invariance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w(1e-9);
    const std::vector<Pattern> patterns = fixture_patterns();
    for (int trial = 0; trial < 20; ++trial) {
        const Pattern &p = patterns[std::uniform_int_distribution<std::size_t>(0, patterns.size() - 1)(rng)];
        std::vector<StabilizerOp> gens = stabilizers_of_resource(p);
        if (gens.empty()) {
            w.fail("no verified stabilizers");
            continue;
        }
        // Random nonempty product of verified generators.
        PauliString word;
        std::bernoulli_distribution coin(0.5);
        bool any = false;
        for (const StabilizerOp &g : gens) {
            if (coin(rng)) {
                word = word * g.word;
                any = true;
            }
        }
        if (!any) word = gens.front().word;
        if (word.phase() != 0 || word.empty()) continue;
        if (!verify_stabilizer(p, word)) {
            w.fail("product " + word.to_string() + " failed verification");
            continue;
        }
        const auto &signals = p.signals();
        const int s = signals[std::uniform_int_distribution<std::size_t>(0, signals.size() - 1)(rng)];
        Pattern q = apply_stabilizer_rewrite(p, word, s);
        w.observe(choi_distance(execute_map(q).choi, execute_map(p).choi));
    }
    return w.outcome();
}

Outcome branch_normalization(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w(1e-10);
    std::vector<Circuit> circuits{fixtures::j_measured_circuit(), pattern_to_circuit(fixtures::j_pattern()),
                                  pattern_to_circuit(fixtures::four_qubit_pattern())};
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int i = 0; i < 5; ++i) circuits.push_back(fixtures::j_measured_circuit(angle(rng)));
    for (const Circuit &c : circuits) {
        for (int i = 0; i < 5; ++i) {
            BranchSet bs = simulate(c, random_state(static_cast<int>(c.input_qubits().size()), rng));
            w.observe(std::abs(bs.total_probability() - 1.0));
            for (const Branch &b : bs.branches) w.observe(std::abs(b.state.norm_squared() - b.probability));
        }
    }
    for (const Pattern &p : fixture_patterns()) {
        const bool deterministic = is_deterministic(p, seed).deterministic;
        for (int i = 0; i < 5; ++i) {
            BranchSet bs = execute(p, random_state(static_cast<int>(p.inputs().size()), rng));
            w.observe(std::abs(bs.total_probability() - 1.0));
            if (!deterministic) continue;
            const double each = 1.0 / static_cast<double>(bs.branches.size());
            for (const Branch &b : bs.branches) w.observe(std::abs(b.probability - each));
        }
    }
    return w.outcome();
}

}  // namespace properties
