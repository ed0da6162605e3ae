#include "ctcmbqc/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace ctcmbqc {

std::string format12(double x) {
    if (x == 0.0) x = 0.0;  // drops the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    std::string s(buf);
    return s == "-0" ? "0" : s;
}

double round12(double x) { return std::strtod(format12(x).c_str(), nullptr); }

Json bloch_json(const BlochVector &b) { return Json::array({round12(b.x), round12(b.y), round12(b.z)}); }

Json amplitudes_json(const Vector &v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({round12(v(i).real()), round12(v(i).imag())});
    return out;
}

Json matrix_json(const Matrix &m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({round12(m(r, c).real()), round12(m(r, c).imag())});
        rows.push_back(row);
    }
    return rows;
}

Json pauli_coefficients_json(const Matrix &rho) {
    const int k = qubit_count_for_dimension(static_cast<std::size_t>(rho.rows()));
    Json out = Json::array();
    for (const Matrix &p : pauli_basis(k)) out.push_back(round12((p * rho).trace().real()));
    return out;
}

namespace {

// Bloch triple for one qubit, Pauli coefficients otherwise.
Json state_summary(const Matrix &rho) {
    if (rho.rows() == 2) return bloch_json(to_bloch(rho));
    return pauli_coefficients_json(rho);
}

}  // namespace

Json to_json(const BranchSet &bs) {
    Json j;
    j["output_qubits"] = bs.output_qubits;
    j["total_probability"] = round12(bs.total_probability());
    Json branches = Json::array();
    for (const Branch &b : bs.branches) {
        Json e;
        Json outcomes = Json::object();
        for (auto [s, v] : b.outcomes) outcomes["s" + std::to_string(s)] = v;
        e["outcomes"] = outcomes;
        e["probability"] = round12(b.probability);
        e["state"] = amplitudes_json(b.state.amplitudes());
        branches.push_back(e);
    }
    j["branches"] = branches;
    return j;
}

Json to_json(const BssResult &r) {
    Json j;
    j["success_probability"] = round12(r.success_probability);
    j["grandfather_paradox"] = r.grandfather_paradox;
    if (r.output_state) {
        j["output_state"] = amplitudes_json(r.output_state->amplitudes());
        if (r.output_state->num_qubits() == 1) j["output_bloch"] = bloch_json(to_bloch(DensityMatrix::pure(*r.output_state)));
    } else {
        j["output_state"] = nullptr;
    }
    return j;
}

Json to_json(const DeutschSolution &s) {
    Json j;
    j["input"] = state_summary(s.rho_in.matrix());
    j["family_dimension"] = s.family_dimension();
    Json basis = Json::array();
    for (const Matrix &d : s.fixed_point_basis) basis.push_back(state_summary(d));
    j["family_basis"] = basis;
    j["canonical_ctc"] = state_summary(s.canonical_rho_ctc.matrix());
    j["canonical_output"] = state_summary(s.canonical_rho_out.matrix());
    j["canonical_output_purity"] = round12(s.canonical_rho_out.purity());
    Json ext = Json::array();
    for (std::size_t i = 0; i < s.extremal_rho_ctc.size(); ++i) {
        ext.push_back({{"ctc", state_summary(s.extremal_rho_ctc[i].matrix())},
                       {"output", state_summary(s.extremal_rho_out[i].matrix())}});
    }
    j["extremals"] = ext;
    j["converged"] = s.converged;
    j["cesaro_residual"] = round12(s.cesaro_residual);
    return j;
}

Json to_json(const ConflictReport &r) {
    Json rows = Json::array();
    for (const ConflictRow &row : r.rows) {
        Json e;
        e["input_bloch"] = bloch_json(row.input_bloch);
        e["bss_p"] = round12(row.bss_p);
        e["grandfather"] = row.grandfather;
        e["trace_distance"] = row.grandfather ? Json(nullptr) : Json(round12(row.trace_distance));
        e["bss_purity"] = row.grandfather ? Json(nullptr) : Json(round12(row.bss_purity));
        e["deutsch_purity"] = round12(row.deutsch_purity);
        e["agree"] = row.agree;
        rows.push_back(e);
    }
    Json j;
    j["rows"] = rows;
    j["agreement"] = r.agreement;
    return j;
}

Json to_json(const std::vector<RewriteStep> &log) {
    Json out = Json::array();
    for (const RewriteStep &s : log) {
        const char *op = s.op == RewriteStep::Op::LC ? "LC" : s.op == RewriteStep::Op::ZDEL ? "ZDEL" : "DROP";
        out.push_back({{"op", op}, {"vertex", s.vertex}});
    }
    return out;
}

Json to_json(const CtcSimulation &s) {
    Json j;
    j["log"] = to_json(s.log);
    j["pattern"] = s.pattern.to_string();
    j["operator"] = s.pattern.to_operator_string();
    j["deterministic"] = s.deterministic;
    j["map_distance"] = round12(s.map_distance);
    if (s.time_respecting_pattern) {
        j["time_respecting_pattern"] = s.time_respecting_pattern->to_string();
        Json rw = Json::array();
        for (const StabilizerOp &op : s.rewrites) rw.push_back(op.to_string());
        j["rewrites"] = rw;
    } else {
        j["time_respecting_pattern"] = nullptr;
    }
    return j;
}

std::string dump_json(const Json &j) { return j.dump(2) + "\n"; }

TextTable::TextTable(std::vector<std::string> headers) : headers_(std::move(headers)) {}

void TextTable::add_row(std::vector<std::string> cells) {
    cells.resize(headers_.size());
    rows_.push_back(std::move(cells));
}

std::string TextTable::render() const {
    std::vector<std::size_t> width(headers_.size());
    for (std::size_t c = 0; c < headers_.size(); ++c) {
        width[c] = headers_[c].size();
        for (const auto &row : rows_) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream os;
    auto line = [&](const std::vector<std::string> &cells) {
        std::string out;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out += cells[c];
            if (c + 1 < cells.size()) out += std::string(width[c] - cells[c].size() + 2, ' ');
        }
        os << out << "\n";
    };
    line(headers_);
    for (const auto &row : rows_) line(row);
    return os.str();
}

namespace {

std::string bloch_text(const BlochVector &b) { return "(" + format12(b.x) + ", " + format12(b.y) + ", " + format12(b.z) + ")"; }

std::string summary_text(const Matrix &rho) {
    if (rho.rows() == 2) return bloch_text(to_bloch(rho));
    std::string out = "[";
    bool first = true;
    for (const auto &c : pauli_coefficients_json(rho)) {
        out += (first ? "" : ", ") + format12(c.get<double>());
        first = false;
    }
    return out + "]";
}

std::string amplitudes_text(const Vector &v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += " ";
        out += format12(v(i).real());
        double im = v(i).imag();
        if (round12(im) != 0.0) out += (im < 0 ? "-" : "+") + format12(std::abs(im)) + "i";
    }
    return out;
}

}  // namespace

std::string to_text(const BranchSet &bs) {
    TextTable t({"outcomes", "probability", "state"});
    for (const Branch &b : bs.branches) {
        std::string outcomes;
        for (auto [s, v] : b.outcomes) outcomes += (outcomes.empty() ? "" : " ") + ("s" + std::to_string(s)) + "=" + std::to_string(v);
        t.add_row({outcomes.empty() ? "-" : outcomes, format12(b.probability), amplitudes_text(b.state.amplitudes())});
    }
    return t.render() + "total probability " + format12(bs.total_probability()) + "\n";
}

std::string to_text(const BssResult &r) {
    std::ostringstream os;
    os << "success probability  " << format12(r.success_probability) << "\n";
    if (r.grandfather_paradox) {
        os << "grandfather paradox: no consistent history\n";
    } else {
        os << "output state         " << amplitudes_text(r.output_state->amplitudes()) << "\n";
    }
    return os.str();
}

std::string to_text(const DeutschSolution &s) {
    std::ostringstream os;
    os << "family dimension  " << s.family_dimension() << "\n";
    os << "canonical CTC     " << summary_text(s.canonical_rho_ctc.matrix()) << "\n";
    os << "canonical output  " << summary_text(s.canonical_rho_out.matrix()) << "  purity "
       << format12(s.canonical_rho_out.purity()) << "\n";
    os << "converged         " << (s.converged ? "yes" : "no") << "\n";
    if (!s.extremal_rho_ctc.empty()) {
        TextTable t({"extremal CTC", "output"});
        for (std::size_t i = 0; i < s.extremal_rho_ctc.size(); ++i) {
            t.add_row({summary_text(s.extremal_rho_ctc[i].matrix()), summary_text(s.extremal_rho_out[i].matrix())});
        }
        os << t.render();
    }
    return os.str();
}

std::string to_text(const ConflictReport &r) {
    TextTable t({"input", "bss_p", "distance", "bss_purity", "deutsch_purity", "agree"});
    for (const ConflictRow &row : r.rows) {
        t.add_row({bloch_text(row.input_bloch), format12(row.bss_p), row.grandfather ? "paradox" : format12(row.trace_distance),
                   row.grandfather ? "-" : format12(row.bss_purity), format12(row.deutsch_purity), row.agree ? "yes" : "no"});
    }
    std::string idx;
    for (std::size_t i : r.agreement) idx += (idx.empty() ? "" : " ") + std::to_string(i);
    return t.render() + "agreement at rows: " + (idx.empty() ? "none" : idx) + "\n";
}

std::string to_text(const CtcSimulation &s) {
    std::ostringstream os;
    os << "rewrites       ";
    for (std::size_t i = 0; i < s.log.size(); ++i) os << (i ? ", " : "") << s.log[i].to_string();
    os << "\npattern        " << s.pattern.to_operator_string() << "\n";
    os << "deterministic  " << (s.deterministic ? "yes" : "no") << "\n";
    os << "map distance   " << format12(s.map_distance) << "\n";
    if (s.time_respecting_pattern) os << "time-respecting form  " << s.time_respecting_pattern->to_operator_string() << "\n";
    return os.str();
}

}  // namespace ctcmbqc
