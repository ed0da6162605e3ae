#include "ctcmbqc/cli.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ctcmbqc/error.hpp"
#include "ctcmbqc/report.hpp"
#include "ctcmbqc/scenarios.hpp"

namespace ctcmbqc {

namespace {

struct RunConfig {
    std::string command;
    std::string mode;  // translate direction or scenario name
    std::string path;
    std::string input = "0";
    std::string bloch;
    double tol = 1e-10;
    double theta = 0.7;
    std::uint64_t seed = 0;
    std::string format = "text";
    std::string out_path;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool ends_with(const std::string &s, const std::string &suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_spec_document(const std::string &text) {
    try {
        auto j = Json::parse(text);
        return j.is_object() && j.contains("V");
    } catch (const Json::exception &) {
        return false;
    }
}

// Per-qubit tokens separated by commas: 0, 1, +, -, +i, -i; or "random".
StateVector parse_input(const std::string &text, int qubits, std::uint64_t seed) {
    if (text == "random") {
        std::mt19937_64 rng(seed);
        return random_state(qubits, rng);
    }
    std::vector<std::string> tokens;
    std::stringstream ss(text);
    for (std::string t; std::getline(ss, t, ',');) tokens.push_back(t);
    if (tokens.size() == 1 && qubits > 1) tokens.assign(static_cast<std::size_t>(qubits), tokens[0]);
    if (static_cast<int>(tokens.size()) != qubits) {
        throw Error(ErrorCode::DimensionMismatch, "input names " + std::to_string(tokens.size()) + " qubits, expected " +
                                                      std::to_string(qubits));
    }
    StateVector out;
    const double r = 1.0 / std::sqrt(2.0);
    for (const std::string &t : tokens) {
        StateVector one;
        if (t == "0") {
            one = StateVector::basis(1, 0);
        } else if (t == "1") {
            one = StateVector::basis(1, 1);
        } else if (t == "+") {
            one = StateVector::plus();
        } else if (t == "-") {
            one = StateVector::from_amplitudes({r, -r});
        } else if (t == "+i") {
            one = StateVector::from_amplitudes({r, Complex(0, r)});
        } else if (t == "-i") {
            one = StateVector::from_amplitudes({r, Complex(0, -r)});
        } else {
            throw Error(ErrorCode::Validation, "unknown input state '" + t + "'");
        }
        out = tensor(out, one);
    }
    return out;
}

DensityMatrix parse_bloch(const std::string &text) {
    std::vector<double> v;
    std::stringstream ss(text);
    for (std::string t; std::getline(ss, t, ',');) {
        try {
            v.push_back(std::stod(t));
        } catch (const std::exception &) {
            throw Error(ErrorCode::Validation, "Bloch component '" + t + "' is not a number");
        }
    }
    if (v.size() != 3) throw Error(ErrorCode::Validation, "Bloch vector needs three components");
    return to_density({v[0], v[1], v[2]});
}

struct Output {
    Json json;
    std::string text;
    int code = 0;
};

Output render(Json j, std::string text) { return {std::move(j), std::move(text), 0}; }

Output cmd_simulate(const RunConfig &cfg) {
    const std::string text = read_file(cfg.path);
    if (ends_with(cfg.path, ".pattern")) {
        Pattern p = parse_pattern(text);
        BranchSet bs = execute(p, parse_input(cfg.input, static_cast<int>(p.inputs().size()), cfg.seed));
        return render(to_json(bs), to_text(bs));
    }
    Circuit c = parse_circuit(text);
    StateVector in = parse_input(cfg.input, static_cast<int>(c.input_qubits().size()), cfg.seed);
    bool consistent = !c.ctc_wires().empty() || c.is_anachronical();
    BranchSet bs = consistent ? simulate_consistent(c, in) : simulate(c, in);
    Json j;
    j["semantics"] = consistent ? "consistent" : "standard";
    j.update(to_json(bs));
    return render(j, std::string("semantics ") + (consistent ? "consistent" : "standard") + "\n" + to_text(bs));
}

Output cmd_bss(const RunConfig &cfg) {
    CtcSpec spec = parse_ctc_spec(read_file(cfg.path));
    BssResult r = bss_simulate(spec, parse_input(cfg.input, static_cast<int>(spec.register_inputs().size()), cfg.seed));
    return render(to_json(r), to_text(r));
}

Output cmd_deutsch(const RunConfig &cfg) {
    CtcSpec spec = parse_ctc_spec(read_file(cfg.path));
    DensityMatrix rho = cfg.bloch.empty()
                            ? DensityMatrix::pure(parse_input(cfg.input, static_cast<int>(spec.register_inputs().size()), cfg.seed))
                            : parse_bloch(cfg.bloch);
    DeutschSolution s = deutsch_fixed_points(spec, rho);
    return render(to_json(s), to_text(s));
}

Output cmd_translate(const RunConfig &cfg) {
    const std::string text = read_file(cfg.path);
    if (cfg.mode == "c2p") {
        Pattern p = circuit_to_pattern(parse_circuit(text));
        return render(Json{{"pattern", p.to_string()}, {"operator", p.to_operator_string()}}, p.to_string());
    }
    Circuit c = pattern_to_circuit(parse_pattern(text));
    const std::string doc = serialize_circuit(c);
    return render(Json::parse(doc), doc + "\n");
}

Output cmd_extract(const RunConfig &cfg) {
    const std::string text = read_file(cfg.path);
    Circuit c = ends_with(cfg.path, ".pattern") ? pattern_to_circuit(parse_pattern(text)) : parse_circuit(text);
    const std::string doc = serialize_circuit(extract_ctc(c));
    return render(Json::parse(doc), doc + "\n");
}

Output cmd_simplify(const RunConfig &cfg) {
    const std::string text = read_file(cfg.path);
    if (ends_with(cfg.path, ".graph")) {
        auto [g, plan] = parse_graph(text);
        Elimination el = eliminate_pauli_measurements(g, plan);
        Pattern p = emit_pattern(el.graph, el.plan);
        std::string log;
        for (std::size_t i = 0; i < el.log.size(); ++i) log += (i ? ", " : "") + el.log[i].to_string();
        Json j{{"log", to_json(el.log)}, {"pattern", p.to_string()}, {"operator", p.to_operator_string()}};
        return render(j, "rewrites  " + log + "\npattern   " + p.to_operator_string() + "\n");
    }
    Circuit c = is_spec_document(text) ? build_bss_circuit(parse_ctc_spec(text)) : parse_circuit(text);
    CtcSimulation sim = deterministic_ctc_simulation(c);
    return render(to_json(sim), to_text(sim));
}

Output cmd_compare(const RunConfig &cfg) {
    CtcSpec spec = parse_ctc_spec(read_file(cfg.path));
    std::vector<DensityMatrix> grid;
    for (const BlochVector &b : bloch_grid62()) grid.push_back(to_density(b));
    ConflictReport rep = compare_models(spec, grid, std::max(cfg.tol, 1e-9));
    return render(to_json(rep), to_text(rep));
}

Output cmd_repro(const RunConfig &cfg) {
    ScenarioOptions opt{cfg.theta, cfg.tol, cfg.seed};
    std::vector<std::string> names = cfg.mode == "all" ? scenario_names() : std::vector<std::string>{cfg.mode};
    Json arr = Json::array();
    std::string text;
    bool ok = true;
    for (const std::string &name : names) {
        ScenarioResult r = run_scenario(name, opt);
        ok = ok && r.passed();
        arr.push_back(to_json(r));
        text += to_text(r);
    }
    Output o{names.size() == 1 ? arr[0] : arr, text, 0};
    o.code = ok ? 0 : kExitMismatch;
    return o;
}

void add_common(CLI::App *sub, RunConfig &cfg) {
    sub->add_option("--tol", cfg.tol, "Numerical tolerance")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed for randomized inputs")->capture_default_str();
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    sub->add_option("--out", cfg.out_path, "Write the report to this file");
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    RunConfig cfg;
    CLI::App app{"Closed-timelike-curve simulation with circuits and measurement patterns", "ctcmbqc"};
    app.require_subcommand(1);

    auto *sim = app.add_subcommand("simulate", "Enumerate measurement branches of a circuit or pattern");
    sim->add_option("file", cfg.path, "Circuit JSON or .pattern file")->required();
    sim->add_option("--input", cfg.input, "Input state: 0,1,+,-,+i,-i per qubit, or random")->capture_default_str();

    auto *bss = app.add_subcommand("bss", "BSS simulation of a CTC spec");
    bss->add_option("spec", cfg.path, "CTC spec JSON")->required();
    bss->add_option("--input", cfg.input, "Input state")->capture_default_str();

    auto *deutsch = app.add_subcommand("deutsch", "Deutsch fixed points of a CTC spec");
    deutsch->add_option("spec", cfg.path, "CTC spec JSON")->required();
    deutsch->add_option("--input", cfg.input, "Input state")->capture_default_str();
    deutsch->add_option("--bloch", cfg.bloch, "Single-qubit input as x,y,z (may be mixed)");

    auto *translate = app.add_subcommand("translate", "Translate between circuits and patterns");
    translate->add_option("direction", cfg.mode, "c2p or p2c")->required()->check(CLI::IsMember({"c2p", "p2c"}));
    translate->add_option("file", cfg.path, "Input file")->required();

    auto *extract = app.add_subcommand("extract-ctc", "Replace anachronical controls by CTC wires");
    extract->add_option("file", cfg.path, "Circuit JSON or .pattern file")->required();

    auto *simplify = app.add_subcommand("simplify", "Pauli elimination of a BSS circuit, spec or graph");
    simplify->add_option("file", cfg.path, "BSS circuit JSON, CTC spec JSON or .graph file")->required();

    auto *compare = app.add_subcommand("compare", "BSS versus Deutsch over a 62-point Bloch grid");
    compare->add_option("spec", cfg.path, "CTC spec JSON")->required();

    auto *repro = app.add_subcommand("repro", "Run a named reproduction scenario");
    std::vector<std::string> allowed = scenario_names();
    allowed.push_back("all");
    repro->add_option("scenario", cfg.mode, "Scenario name or all")->required()->check(CLI::IsMember(allowed));
    repro->add_option("--theta", cfg.theta, "Measurement angle")->capture_default_str();

    for (CLI::App *sub : {sim, bss, deutsch, translate, extract, simplify, compare, repro}) add_common(sub, cfg);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    Output result;
    try {
        if (cfg.command == "simulate") result = cmd_simulate(cfg);
        else if (cfg.command == "bss") result = cmd_bss(cfg);
        else if (cfg.command == "deutsch") result = cmd_deutsch(cfg);
        else if (cfg.command == "translate") result = cmd_translate(cfg);
        else if (cfg.command == "extract-ctc") result = cmd_extract(cfg);
        else if (cfg.command == "simplify") result = cmd_simplify(cfg);
        else if (cfg.command == "compare") result = cmd_compare(cfg);
        else result = cmd_repro(cfg);
    } catch (const Error &e) {
        err << "error [" << error_code_name(e.code()) << "]: " << e.what();
        if (e.line()) err << " (line " << *e.line() << ", column " << e.column().value_or(0) << ")";
        if (e.event()) err << " (event " << *e.event() << ")";
        err << "\n";
        return e.code() == ErrorCode::Io ? kExitIo : kExitInvalid;
    }

    const std::string payload = cfg.format == "json" ? dump_json(result.json) : result.text;
    if (cfg.out_path.empty()) {
        out << payload;
    } else {
        std::ofstream f(cfg.out_path, std::ios::binary);
        if (!f || !(f << payload)) {
            err << "error [Io]: cannot write '" << cfg.out_path << "'\n";
            return kExitIo;
        }
    }
    return result.code;
}

}  // namespace ctcmbqc
