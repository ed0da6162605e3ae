#include "ctcmbqc/pattern.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ctcmbqc/error.hpp"

namespace ctcmbqc {

// ---------------------------------------------------------------------------
// Commands

Command Command::n(int q) {
    Command c;
    c.kind = CommandKind::N;
    c.qubit = q;
    return c;
}

Command Command::e(int a, int b) {
    Command c;
    c.kind = CommandKind::E;
    c.qubit = a;
    c.other = b;
    return c;
}

Command Command::m(int q, double theta) {
    Command c;
    c.kind = CommandKind::M;
    c.qubit = q;
    c.theta = theta;
    return c;
}

Command Command::m_z(int q) {
    Command c = m(q, 0.0);
    c.z_basis = true;
    return c;
}

Command Command::x(int q, std::optional<int> dep) {
    Command c;
    c.kind = CommandKind::X;
    c.qubit = q;
    c.dep = dep;
    return c;
}

Command Command::z(int q, std::optional<int> dep) {
    Command c = x(q, dep);
    c.kind = CommandKind::Z;
    return c;
}

namespace {

std::string format_angle(double theta) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, theta);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

std::string format_command(const Command &c) {
    switch (c.kind) {
        case CommandKind::N: return "N " + std::to_string(c.qubit);
        case CommandKind::E: return "E " + std::to_string(c.qubit) + " " + std::to_string(c.other);
        case CommandKind::M:
            if (c.z_basis) return "M " + std::to_string(c.qubit) + " basis=Z";
            return "M " + std::to_string(c.qubit) + " theta=" + format_angle(c.theta);
        case CommandKind::X:
        case CommandKind::Z: {
            std::string out = (c.kind == CommandKind::X ? "X " : "Z ") + std::to_string(c.qubit);
            if (c.dep) out += " dep=s" + std::to_string(*c.dep);
            return out;
        }
    }
    return "?";
}

std::string format_command_operator(const Command &c) {
    switch (c.kind) {
        case CommandKind::N: return "N" + std::to_string(c.qubit);
        case CommandKind::E: return "E" + std::to_string(c.qubit) + std::to_string(c.other);
        case CommandKind::M:
            if (c.z_basis) return "M" + std::to_string(c.qubit) + "^{Z}";
            return "M" + std::to_string(c.qubit) + "^{" + format_angle(c.theta) + "}";
        case CommandKind::X:
        case CommandKind::Z: {
            std::string out = (c.kind == CommandKind::X ? "X" : "Z") + std::to_string(c.qubit);
            if (c.dep) out += "^{s" + std::to_string(*c.dep) + "}";
            return out;
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Pattern

Pattern::Pattern(std::vector<int> inputs, std::vector<int> outputs, std::vector<Command> commands)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), commands_(std::move(commands)) {
    validate();
}

void Pattern::validate() {
    enum class Life { Unborn, Live, Measured };
    std::map<int, Life> life;
    for (int q : inputs_) {
        if (q < 1) throw Error(ErrorCode::Validation, "qubit ids must be positive");
        if (life.count(q)) throw Error(ErrorCode::Validation, "input " + std::to_string(q) + " listed twice");
        life[q] = Life::Live;
    }
    std::set<int> measured_anywhere;
    for (const Command &c : commands_) {
        if (c.kind == CommandKind::M) measured_anywhere.insert(c.qubit);
    }
    signals_.clear();
    for (std::size_t i = 0; i < commands_.size(); ++i) {
        const Command &c = commands_[i];
        auto where = " (command " + std::to_string(i) + ": " + format_command(c) + ")";
        auto require_live = [&](int q) {
            auto it = life.find(q);
            if (it == life.end() || it->second == Life::Unborn) {
                throw Error(ErrorCode::Validation, "qubit " + std::to_string(q) + " used before preparation" + where, i);
            }
            if (it->second == Life::Measured) {
                throw Error(ErrorCode::Validation, "qubit " + std::to_string(q) + " used after measurement" + where, i);
            }
        };
        if (c.qubit < 1 || (c.kind == CommandKind::E && c.other < 1)) {
            throw Error(ErrorCode::Validation, "qubit ids must be positive" + where, i);
        }
        switch (c.kind) {
            case CommandKind::N:
                if (life.count(c.qubit)) {
                    throw Error(ErrorCode::Validation,
                                "qubit " + std::to_string(c.qubit) + " prepared twice or is an input" + where, i);
                }
                life[c.qubit] = Life::Live;
                break;
            case CommandKind::E:
                if (c.qubit == c.other) throw Error(ErrorCode::Validation, "E on a single qubit" + where, i);
                require_live(c.qubit);
                require_live(c.other);
                break;
            case CommandKind::M:
                require_live(c.qubit);
                life[c.qubit] = Life::Measured;
                signals_.push_back(c.qubit);
                break;
            case CommandKind::X:
            case CommandKind::Z:
                require_live(c.qubit);
                if (c.dep && !measured_anywhere.count(*c.dep)) {
                    throw Error(ErrorCode::UnknownSignal, "signal s" + std::to_string(*c.dep) + " is never measured" + where,
                                i);
                }
                break;
        }
    }
    std::set<int> seen_out;
    for (int q : outputs_) {
        auto it = life.find(q);
        if (it == life.end()) throw Error(ErrorCode::Validation, "output " + std::to_string(q) + " is never prepared");
        if (it->second == Life::Measured) {
            throw Error(ErrorCode::Validation, "output " + std::to_string(q) + " is measured");
        }
        if (!seen_out.insert(q).second) throw Error(ErrorCode::Validation, "output " + std::to_string(q) + " listed twice");
    }
    qubits_.clear();
    for (auto &[q, l] : life) {
        if (l == Life::Live && !seen_out.count(q)) {
            throw Error(ErrorCode::Validation, "qubit " + std::to_string(q) + " is neither measured nor an output");
        }
        qubits_.push_back(q);
    }
}

bool Pattern::is_measured(int q) const { return std::find(signals_.begin(), signals_.end(), q) != signals_.end(); }

std::size_t Pattern::measurement_index(int q) const {
    for (std::size_t i = 0; i < commands_.size(); ++i) {
        if (commands_[i].kind == CommandKind::M && commands_[i].qubit == q) return i;
    }
    throw Error(ErrorCode::UnknownSignal, "qubit " + std::to_string(q) + " is never measured");
}

std::vector<int> Pattern::anachronical_signals() const {
    std::set<int> out;
    std::set<int> measured;
    for (const Command &c : commands_) {
        if (c.kind == CommandKind::M) measured.insert(c.qubit);
        if (c.is_correction() && c.dep && !measured.count(*c.dep)) out.insert(*c.dep);
    }
    return {out.begin(), out.end()};
}

bool Pattern::is_standard() const {
    bool tail = false;
    for (const Command &c : commands_) {
        bool prefix = c.kind == CommandKind::N || c.kind == CommandKind::E;
        if (prefix && tail) return false;
        if (!prefix) tail = true;
    }
    return true;
}

std::vector<std::pair<int, int>> Pattern::edges() const {
    std::set<std::pair<int, int>> out;
    for (const Command &c : commands_) {
        if (c.kind != CommandKind::E) continue;
        std::pair<int, int> e{std::min(c.qubit, c.other), std::max(c.qubit, c.other)};
        if (!out.erase(e)) out.insert(e);
    }
    return {out.begin(), out.end()};
}

std::string Pattern::to_string() const {
    std::ostringstream os;
    os << "inputs:";
    for (int q : inputs_) os << ' ' << q;
    os << "\noutputs:";
    for (int q : outputs_) os << ' ' << q;
    os << '\n';
    for (const Command &c : commands_) os << format_command(c) << '\n';
    return os.str();
}

std::string Pattern::to_operator_string() const {
    std::string out;
    for (auto it = commands_.rbegin(); it != commands_.rend(); ++it) {
        if (!out.empty()) out += ' ';
        out += format_command_operator(*it);
    }
    return out;
}

namespace {

int parse_int(const std::string &tok, std::size_t line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error(ErrorCode::Parse, "expected an integer, got '" + tok + "'", line, 1);
    }
    return v;
}

double parse_double(const std::string &tok, std::size_t line) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error(ErrorCode::Parse, "expected a number, got '" + tok + "'", line, 1);
    }
    return v;
}

std::vector<std::string> split_words(const std::string &s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

}  // namespace

Pattern parse_pattern(const std::string &text) {
    std::vector<int> inputs;
    std::vector<int> outputs;
    std::vector<Command> commands;
    std::istringstream is(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        auto colon = raw.find(':');
        if (colon != std::string::npos) {
            auto key = split_words(raw.substr(0, colon));
            if (key.size() != 1 || (key[0] != "inputs" && key[0] != "outputs")) {
                throw Error(ErrorCode::Parse, "unknown header '" + raw.substr(0, colon) + "'", line, 1);
            }
            auto &dst = key[0] == "inputs" ? inputs : outputs;
            for (const auto &w : split_words(raw.substr(colon + 1))) dst.push_back(parse_int(w, line));
            continue;
        }
        auto words = split_words(raw);
        if (words.empty()) continue;
        const std::string &op = words[0];
        auto need = [&](std::size_t n) {
            if (words.size() < n) throw Error(ErrorCode::Parse, "'" + op + "' needs more arguments", line, 1);
        };
        if (op == "N") {
            need(2);
            commands.push_back(Command::n(parse_int(words[1], line)));
        } else if (op == "E") {
            need(3);
            commands.push_back(Command::e(parse_int(words[1], line), parse_int(words[2], line)));
        } else if (op == "M") {
            need(2);
            Command c = Command::m(parse_int(words[1], line), 0.0);
            for (std::size_t k = 2; k < words.size(); ++k) {
                const std::string &w = words[k];
                if (w.rfind("theta=", 0) == 0) {
                    c.theta = parse_double(w.substr(6), line);
                } else if (w == "basis=Z") {
                    c.z_basis = true;
                } else if (w == "basis=X") {
                    c.theta = 0.0;
                } else {
                    c.theta = parse_double(w, line);
                }
            }
            commands.push_back(c);
        } else if (op == "X" || op == "Z") {
            need(2);
            std::optional<int> dep;
            if (words.size() > 2) {
                std::string d = words[2];
                if (d.rfind("dep=", 0) == 0) d = d.substr(4);
                if (!d.empty() && d[0] == 's') d = d.substr(1);
                dep = parse_int(d, line);
            }
            int q = parse_int(words[1], line);
            commands.push_back(op == "X" ? Command::x(q, dep) : Command::z(q, dep));
        } else {
            throw Error(ErrorCode::Parse, "unknown command '" + op + "'", line, 1);
        }
    }
    return Pattern(std::move(inputs), std::move(outputs), std::move(commands));
}

// ---------------------------------------------------------------------------
// Execution

namespace {

class PatternEngine {
   public:
    PatternEngine(const Pattern &p, std::map<int, int> forced, bool skip_prefix)
        : p_(p), forced_(std::move(forced)), skip_prefix_(skip_prefix) {
        const auto &qs = p.qubits();
        for (std::size_t k = 0; k < qs.size(); ++k) pos_[qs[k]] = static_cast<int>(k) + 1;
        n_ = static_cast<int>(qs.size());
        for (int q : p.outputs()) out_pos_.push_back(pos_.at(q));
    }

    void run(std::size_t idx, Vector state, std::map<int, int> outcomes) {
        const auto &cmds = p_.commands();
        for (; idx < cmds.size(); ++idx) {
            const Command &c = cmds[idx];
            if (skip_prefix_ && (c.kind == CommandKind::N || c.kind == CommandKind::E)) continue;
            const int a = pos_.at(c.qubit);
            switch (c.kind) {
                case CommandKind::N: apply_operator(state, n_, std::span<const int>(&a, 1), gates::h()); break;
                case CommandKind::E: {
                    int pair[2] = {a, pos_.at(c.other)};
                    apply_operator(state, n_, pair, gates::cz());
                    break;
                }
                case CommandKind::X:
                case CommandKind::Z: {
                    if (c.dep && signal_value(*c.dep, outcomes) == 0) break;
                    apply_operator(state, n_, std::span<const int>(&a, 1),
                                   c.kind == CommandKind::X ? gates::x() : gates::z());
                    break;
                }
                case CommandKind::M: {
                    std::vector<int> allowed = {0, 1};
                    if (auto f = forced_.find(c.qubit); f != forced_.end()) allowed = {f->second};
                    for (std::size_t k = 0; k + 1 < allowed.size(); ++k) {
                        Vector branch = state;
                        project_qubits(branch, n_, std::span<const int>(&a, 1), basis(c, allowed[k]));
                        auto next = outcomes;
                        next[c.qubit] = allowed[k];
                        run(idx + 1, std::move(branch), std::move(next));
                    }
                    project_qubits(state, n_, std::span<const int>(&a, 1), basis(c, allowed.back()));
                    outcomes[c.qubit] = allowed.back();
                    break;
                }
            }
        }
        Branch br;
        for (auto [s, v] : outcomes) br.outcomes.emplace_back(s, v);
        Vector out = extract_qubits(state, n_, out_pos_);
        br.probability = out.squaredNorm();
        br.state = StateVector(std::move(out), 1e-8);
        branches.push_back(std::move(br));
    }

    Vector initial(const StateVector &input) const {
        std::vector<int> in_pos;
        for (int q : p_.inputs()) in_pos.push_back(pos_.at(q));
        return embed_qubits(input.amplitudes(), n_, in_pos);
    }

    std::vector<Branch> branches;

   private:
    static Vector basis(const Command &c, int outcome) {
        if (c.z_basis) {
            Vector v = Vector::Zero(2);
            v(outcome) = 1.0;
            return v;
        }
        return (outcome == 0 ? StateVector::plus_theta(c.theta) : StateVector::minus_theta(c.theta)).amplitudes();
    }

    int signal_value(int s, const std::map<int, int> &outcomes) const {
        if (auto it = outcomes.find(s); it != outcomes.end()) return it->second;
        if (auto it = forced_.find(s); it != forced_.end()) return it->second;
        throw Error(ErrorCode::UnknownSignal, "signal s" + std::to_string(s) + " has no value");
    }

    const Pattern &p_;
    std::map<int, int> forced_;
    bool skip_prefix_ = false;
    std::map<int, int> pos_;
    std::vector<int> out_pos_;
    int n_ = 0;
};

}  // namespace

namespace {

// `start` is the full register over p.qubits(); with `skip_prefix` it already
// holds the resource state and N/E commands are not replayed.
BranchSet run_pattern(const Pattern &p, const Vector &start, bool skip_prefix, const std::map<int, int> &postselect) {
    std::vector<int> assumed;
    for (int s : p.anachronical_signals()) {
        if (!postselect.count(s)) assumed.push_back(s);
    }
    BranchSet out;
    out.output_qubits = p.outputs();
    const std::size_t combos = std::size_t{1} << assumed.size();
    for (std::size_t a = 0; a < combos; ++a) {
        std::map<int, int> forced = postselect;
        for (std::size_t k = 0; k < assumed.size(); ++k) {
            forced[assumed[k]] = static_cast<int>((a >> (assumed.size() - 1 - k)) & 1U);
        }
        PatternEngine engine(p, std::move(forced), skip_prefix);
        engine.run(0, start, {});
        for (auto &b : engine.branches) out.branches.push_back(std::move(b));
    }
    std::stable_sort(out.branches.begin(), out.branches.end(),
                     [](const Branch &x, const Branch &y) { return x.outcomes < y.outcomes; });
    return out;
}

void check_postselection(const Pattern &p, const std::map<int, int> &postselect) {
    for (auto [q, v] : postselect) {
        if (!p.is_measured(q)) throw Error(ErrorCode::UnknownSignal, "cannot postselect unmeasured qubit " + std::to_string(q));
        if (v != 0 && v != 1) throw Error(ErrorCode::Validation, "postselected outcome must be 0 or 1");
    }
}

ProcessMap assemble_map(const Pattern &p, const std::function<BranchSet(std::size_t)> &run_basis) {
    const int n_in = static_cast<int>(p.inputs().size());
    const int n_out = static_cast<int>(p.outputs().size());
    const std::size_t din = std::size_t{1} << n_in;
    std::vector<std::vector<Vector>> images;
    for (std::size_t i = 0; i < din; ++i) {
        BranchSet bs = run_basis(i);
        if (i == 0) images.resize(bs.branches.size());
        for (std::size_t b = 0; b < bs.branches.size(); ++b) images[b].push_back(bs.branches[b].state.amplitudes());
    }
    std::vector<int> keep;
    for (int k = 1; k <= n_out; ++k) keep.push_back(k);
    ProcessMap out;
    auto dim = Eigen::Index{1} << (n_in + n_out);
    Matrix total = Matrix::Zero(dim, dim);
    for (const auto &imgs : images) {
        ChoiMatrix cb = choi_from_images(imgs, n_out, keep);
        total += cb.matrix();
        out.branch_maps.push_back(std::move(cb));
    }
    out.choi = ChoiMatrix(std::move(total), n_in, n_out);
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

}  // namespace

BranchSet execute(const Pattern &p, const StateVector &input, const std::map<int, int> &postselect) {
    if (input.dimension() != (std::size_t{1} << p.inputs().size())) {
        throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(input.num_qubits()) +
                                                      " qubits, pattern expects " + std::to_string(p.inputs().size()));
    }
    check_postselection(p, postselect);
    PatternEngine shape(p, {}, false);
    return run_pattern(p, shape.initial(input), false, postselect);
}

ProcessMap execute_map(const Pattern &p, const std::map<int, int> &postselect) {
    const int n_in = static_cast<int>(p.inputs().size());
    return assemble_map(p, [&](std::size_t i) { return execute(p, StateVector::basis(n_in, i), postselect); });
}

ProcessMap execute_map_on_resource(const Pattern &p, const ResourceFn &resource, const std::map<int, int> &postselect) {
    check_postselection(p, postselect);
    const auto dim = Eigen::Index{1} << p.qubits().size();
    return assemble_map(p, [&](std::size_t i) {
        Vector start = resource(i);
        if (start.size() != dim) throw Error(ErrorCode::DimensionMismatch, "resource state has the wrong dimension");
        return run_pattern(p, start, true, postselect);
    });
}

DeterminismReport is_deterministic(const Pattern &p, std::uint64_t seed) {
    if (p.signals().size() > static_cast<std::size_t>(kMeasurementBudget)) {
        throw Error(ErrorCode::BudgetExceeded, std::to_string(p.signals().size()) + " measured qubits exceed the budget of " +
                                                   std::to_string(kMeasurementBudget));
    }
    DeterminismReport report;
    ProcessMap pm = execute_map(p);
    if (!pm.deterministic) {
        report.reason = "branches implement different maps";
        return report;
    }

    const int n_in = static_cast<int>(p.inputs().size());
    std::vector<StateVector> probes;
    auto product = [&](const StateVector &one) {
        StateVector s;
        for (int k = 0; k < n_in; ++k) s = tensor(s, one);
        return s;
    };
    probes.push_back(product(StateVector::basis(1, 0)));
    probes.push_back(product(StateVector::basis(1, 1)));
    probes.push_back(product(StateVector::plus()));
    probes.push_back(product(StateVector::plus_theta(kPi / 2)));
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 8; ++k) probes.push_back(random_state(n_in, rng));

    std::vector<double> reference;
    for (const StateVector &probe : probes) {
        BranchSet bs = execute(p, probe);
        std::vector<double> probs;
        for (const Branch &b : bs.branches) probs.push_back(b.probability);
        if (reference.empty()) {
            reference = probs;
            continue;
        }
        for (std::size_t b = 0; b < probs.size(); ++b) {
            if (std::abs(probs[b] - reference[b]) > 1e-9) {
                report.reason = "branch probabilities depend on the input";
                return report;
            }
        }
    }
    report.deterministic = true;
    report.map = pm.choi;
    return report;
}

// ---------------------------------------------------------------------------
// Stabilizers

std::string StabilizerOp::to_string() const {
    std::string out = word.to_string();
    if (signal) out = "(" + out + ")^{s" + std::to_string(*signal) + "}";
    return out;
}

Vector resource_state(const Pattern &p, std::size_t input_basis_index) {
    std::vector<Command> prep;
    for (const Command &c : p.commands()) {
        if (c.kind == CommandKind::N || c.kind == CommandKind::E) prep.push_back(c);
    }
    std::map<int, int> pos;
    const auto &qs = p.qubits();
    for (std::size_t k = 0; k < qs.size(); ++k) pos[qs[k]] = static_cast<int>(k) + 1;
    const int n = static_cast<int>(qs.size());
    std::vector<int> in_pos;
    for (int q : p.inputs()) in_pos.push_back(pos.at(q));
    Vector state = embed_qubits(StateVector::basis(static_cast<int>(in_pos.size()), input_basis_index).amplitudes(), n, in_pos);
    for (const Command &c : prep) {
        int a = pos.at(c.qubit);
        if (c.kind == CommandKind::N) {
            apply_operator(state, n, std::span<const int>(&a, 1), gates::h());
        } else {
            int pair[2] = {a, pos.at(c.other)};
            apply_operator(state, n, pair, gates::cz());
        }
    }
    return state;
}

bool verify_stabilizer(const Pattern &p, const PauliString &word, double tol) {
    const auto &qs = p.qubits();
    std::map<int, Pauli> ops;
    for (auto [q, pauli] : word.ops()) {
        auto it = std::find(qs.begin(), qs.end(), q);
        if (it == qs.end()) throw Error(ErrorCode::Validation, "stabilizer acts on unknown qubit " + std::to_string(q));
        ops[static_cast<int>(it - qs.begin()) + 1] = pauli;
    }
    Matrix k = PauliString(ops, word.phase()).matrix(static_cast<int>(qs.size()));
    const std::size_t din = std::size_t{1} << p.inputs().size();
    for (std::size_t b = 0; b < din; ++b) {
        Vector g = resource_state(p, b);
        if ((k * g - g).norm() > tol) return false;
    }
    return true;
}

std::vector<StabilizerOp> stabilizers_of_resource(const Pattern &p) {
    std::map<int, std::set<int>> nbrs;
    for (auto [a, b] : p.edges()) {
        nbrs[a].insert(b);
        nbrs[b].insert(a);
    }
    std::vector<StabilizerOp> out;
    for (int q : p.qubits()) {
        std::map<int, Pauli> ops{{q, Pauli::X}};
        for (int j : nbrs[q]) ops[j] = Pauli::Z;
        PauliString word(ops);
        if (verify_stabilizer(p, word)) out.push_back({word, std::nullopt});
    }
    return out;
}

namespace {

double map_distance(const Pattern &a, const Pattern &b) {
    return choi_distance(execute_map(a).choi, execute_map(b).choi);
}

bool same_correction(const Command &a, const Command &b) {
    return a.kind == b.kind && a.qubit == b.qubit && a.dep == b.dep;
}

// Slides the correction at `k` to the right until it meets an identical one
// (both are removed), a command it cannot pass, or the end.
void slide_and_cancel(std::vector<Command> &cmds, std::size_t k) {
    const Command c = cmds[k];
    while (k + 1 < cmds.size()) {
        const Command &next = cmds[k + 1];
        if (same_correction(c, next)) {
            cmds.erase(cmds.begin() + static_cast<std::ptrdiff_t>(k), cmds.begin() + static_cast<std::ptrdiff_t>(k) + 2);
            return;
        }
        if (next.acts_on(c.qubit) &&
            (next.kind == CommandKind::M || (next.kind == CommandKind::E && c.kind == CommandKind::X))) {
            return;
        }
        std::swap(cmds[k], cmds[k + 1]);
        ++k;
    }
}

}  // namespace

Pattern apply_stabilizer_rewrite(const Pattern &p, const PauliString &word, int signal) {
    if (!p.is_measured(signal)) {
        throw Error(ErrorCode::UnknownSignal, "s" + std::to_string(signal) + " is not a measurement signal of the pattern");
    }
    if (!p.is_standard()) throw Error(ErrorCode::Validation, "stabilizer rewrites need a standard pattern");
    if (word.empty() || !verify_stabilizer(p, word)) {
        throw Error(ErrorCode::UnverifiedStabilizer, word.to_string() + " does not stabilize the resource state");
    }
    std::vector<Command> cmds = p.commands();
    std::size_t prefix = 0;
    while (prefix < cmds.size() && (cmds[prefix].kind == CommandKind::N || cmds[prefix].kind == CommandKind::E)) ++prefix;

    std::vector<Command> inserted;
    for (auto [q, pauli] : word.ops()) {
        // Y ~ XZ: Z first in execution order.
        if (pauli == Pauli::Z || pauli == Pauli::Y) inserted.push_back(Command::z(q, signal));
        if (pauli == Pauli::X || pauli == Pauli::Y) inserted.push_back(Command::x(q, signal));
    }
    cmds.insert(cmds.begin() + static_cast<std::ptrdiff_t>(prefix), inserted.begin(), inserted.end());
    for (std::size_t k = inserted.size(); k-- > 0;) slide_and_cancel(cmds, prefix + k);

    Pattern out(p.inputs(), p.outputs(), std::move(cmds));
    double d = map_distance(p, out);
    if (d > 1e-10) {
        throw Error(ErrorCode::VerificationFailed, "stabilizer rewrite changed the map (distance " + std::to_string(d) + ")");
    }
    return out;
}

Pattern standardize(const Pattern &p) {
    std::vector<Command> ns;
    std::vector<Command> out;
    for (const Command &c : p.commands()) {
        if (c.kind == CommandKind::N) {
            ns.push_back(c);
            continue;
        }
        out.push_back(c);
        if (c.kind != CommandKind::E) continue;
        std::size_t k = out.size() - 1;
        while (k > 0 && out[k - 1].kind != CommandKind::E) {
            const Command prev = out[k - 1];
            if (prev.kind == CommandKind::M && c.acts_on(prev.qubit)) {
                throw Error(ErrorCode::NotStandardizable, format_command(c) + " acts on a qubit measured earlier");
            }
            if (prev.kind == CommandKind::X && c.acts_on(prev.qubit)) {
                // X_i^s then E_ij equals E_ij then X_i^s Z_j^s.
                int partner = prev.qubit == c.qubit ? c.other : c.qubit;
                out[k - 1] = c;
                out[k] = prev;
                out.insert(out.begin() + static_cast<std::ptrdiff_t>(k) + 1, Command::z(partner, prev.dep));
            } else {
                std::swap(out[k - 1], out[k]);
            }
            --k;
        }
    }
    ns.insert(ns.end(), out.begin(), out.end());
    return Pattern(p.inputs(), p.outputs(), std::move(ns));
}

Pattern canonicalize(const Pattern &p) {
    const Pattern s = p.is_standard() ? p : standardize(p);
    std::vector<Command> ns;
    std::vector<Command> tail;
    for (const Command &c : s.commands()) {
        if (c.kind == CommandKind::N) {
            ns.push_back(c);
        } else if (c.kind != CommandKind::E) {
            tail.push_back(c);
        }
    }
    std::sort(ns.begin(), ns.end(), [](const Command &a, const Command &b) { return a.qubit < b.qubit; });

    std::vector<Command> out = ns;
    for (auto [a, b] : s.edges()) out.push_back(Command::e(a, b));

    auto key = [](const Command &c) { return std::tuple(c.kind == CommandKind::X ? 1 : 0, c.dep.value_or(0)); };
    std::map<int, std::map<std::tuple<int, int>, int>> pending;  // qubit -> key -> parity
    std::map<int, std::map<std::tuple<int, int>, Command>> sample;
    auto flush = [&](int q) {
        for (auto &[k, parity] : pending[q]) {
            if (parity % 2) out.push_back(sample[q].at(k));
        }
        pending.erase(q);
    };
    for (const Command &c : tail) {
        if (c.is_correction()) {
            pending[c.qubit][key(c)] += 1;
            sample[c.qubit].emplace(key(c), c);
        } else {
            flush(c.qubit);
            out.push_back(c);
        }
    }
    for (int q : s.outputs()) flush(q);
    return Pattern(s.inputs(), s.outputs(), std::move(out));
}

// ---------------------------------------------------------------------------
// Translation

Circuit pattern_to_circuit(const Pattern &p) {
    std::map<int, int> label;
    const auto &qs = p.qubits();
    for (std::size_t k = 0; k < qs.size(); ++k) label[qs[k]] = static_cast<int>(k) + 1;
    const auto &cmds = p.commands();

    // Z measurement of a wire goes after the last coherent correction it controls.
    std::map<int, std::size_t> last_use;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        const Command &c = cmds[i];
        if (c.kind == CommandKind::M) last_use[c.qubit] = i;
        if (c.is_correction() && c.dep && last_use.count(*c.dep)) last_use[*c.dep] = i;
    }
    std::map<std::size_t, std::vector<int>> measure_after;
    for (int s : p.signals()) measure_after[last_use.at(s)].push_back(s);

    std::vector<Prep> preps;
    std::vector<Event> timeline;
    std::set<int> measured;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        const Command &c = cmds[i];
        const int a = label.at(c.qubit);
        switch (c.kind) {
            case CommandKind::N: preps.push_back({a, PrepState::Plus}); break;
            case CommandKind::E: timeline.push_back(Gate::cz(a, label.at(c.other))); break;
            case CommandKind::M:
                if (!c.z_basis) timeline.push_back(Gate::j(a, -c.theta));
                measured.insert(c.qubit);
                break;
            case CommandKind::X:
            case CommandKind::Z: {
                const GateKind kind = c.kind == CommandKind::X ? GateKind::X : GateKind::Z;
                if (!c.dep) {
                    timeline.push_back(Gate::single(kind, a));
                } else if (measured.count(*c.dep)) {
                    int ctrl = label.at(*c.dep);
                    timeline.push_back(kind == GateKind::X ? Gate::cx(ctrl, a) : Gate::cz(ctrl, a));
                } else {
                    timeline.push_back(Gate::single(kind, a).controlled_by(label.at(*c.dep), true));
                }
                break;
            }
        }
        if (auto it = measure_after.find(i); it != measure_after.end()) {
            for (int s : it->second) {
                Measurement m;
                m.qubit = label.at(s);
                m.basis = MeasureBasis::Z;
                timeline.push_back(m);
            }
        }
    }
    std::sort(preps.begin(), preps.end(), [](const Prep &x, const Prep &y) { return x.qubit < y.qubit; });
    return Circuit(static_cast<int>(qs.size()), std::move(preps), std::move(timeline));
}

namespace {

struct PatternBuilder {
    std::vector<Command> cmds;
    std::map<int, int> wire;
    std::map<int, int> signal_map;  // circuit signal -> pattern qubit
    int next = 0;

    void j_gadget(int q, double theta) {
        const int a = wire.at(q);
        const int j = next++;
        cmds.push_back(Command::n(j));
        cmds.push_back(Command::e(a, j));
        cmds.push_back(Command::z(a, a));
        cmds.push_back(Command::m(a, -theta));
        wire[q] = j;
    }

    int pattern_signal(int circuit_signal) const {
        auto it = signal_map.find(circuit_signal);
        if (it == signal_map.end()) {
            throw Error(ErrorCode::UnknownSignal, "signal s" + std::to_string(circuit_signal) + " is never measured");
        }
        return it->second;
    }
};

// With `known_signals` null, signal references are left as placeholders.
PatternBuilder translate_circuit(const Circuit &c, const std::map<int, int> *known_signals) {
    PatternBuilder b;
    if (known_signals) b.signal_map = *known_signals;
    b.next = c.num_qubits() + 1;
    for (int q = 1; q <= c.num_qubits(); ++q) b.wire[q] = q;
    for (const Prep &p : c.preps()) {
        if (p.state != PrepState::Plus) {
            throw Error(ErrorCode::UnsupportedGate, "patterns only prepare |+>; qubit " + std::to_string(p.qubit) + " starts in |0>");
        }
        b.cmds.push_back(Command::n(p.qubit));
    }
    const auto &timeline = c.timeline();
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        const Event &ev = timeline[i];
        if (auto g = std::get_if<Gate>(&ev)) {
            if (g->control) {
                if (g->kind != GateKind::X && g->kind != GateKind::Z) {
                    throw Error(ErrorCode::UnsupportedGate, "only X and Z may be classically controlled", i);
                }
                int dep = known_signals ? b.pattern_signal(g->control->signal) : 0;
                int a = b.wire.at(g->targets[0]);
                b.cmds.push_back(g->kind == GateKind::X ? Command::x(a, dep) : Command::z(a, dep));
                continue;
            }
            if (g->kind == GateKind::U) throw Error(ErrorCode::UnsupportedGate, "U gates cannot be translated", i);
            for (const Gate &part : expand_to_j_cz(*g)) {
                if (part.kind == GateKind::J) {
                    b.j_gadget(part.targets[0], part.theta);
                } else {
                    b.cmds.push_back(Command::e(b.wire.at(part.targets[0]), b.wire.at(part.targets[1])));
                }
            }
        } else if (auto m = std::get_if<Measurement>(&ev)) {
            const int a = b.wire.at(m->qubit);
            b.signal_map[m->qubit] = a;
            if (m->basis == MeasureBasis::Z) {
                if (m->postselect) throw Error(ErrorCode::UnsupportedGate, "Z-basis postselection has no pattern form", i);
                b.cmds.push_back(Command::m_z(a));
                continue;
            }
            const double theta = m->basis == MeasureBasis::X ? 0.0 : m->theta;
            if (m->postselect) {
                // <-_theta| = <+_theta| Z, and Z^{s} M absorbs the outcome.
                if (*m->postselect == 1) b.cmds.push_back(Command::z(a, std::nullopt));
                b.cmds.push_back(Command::z(a, a));
            }
            b.cmds.push_back(Command::m(a, theta));
        } else {
            throw Error(ErrorCode::UnsupportedGate, "Bell elements must be rewritten first", i);
        }
    }
    return b;
}

}  // namespace

Pattern circuit_to_pattern(const Circuit &circuit) {
    const Circuit c = rewrite_to_plus_form(circuit);
    // First pass fixes which pattern qubit carries each circuit signal, so that
    // anachronical controls can name signals measured later.
    const std::map<int, int> signals = translate_circuit(c, nullptr).signal_map;
    PatternBuilder b = translate_circuit(c, &signals);
    std::vector<int> outputs;
    for (int q : c.output_qubits()) outputs.push_back(b.wire.at(q));
    return Pattern(c.input_qubits(), std::move(outputs), std::move(b.cmds));
}

}  // namespace ctcmbqc
