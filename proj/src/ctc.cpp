#include "ctcmbqc/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <unsupported/Eigen/KroneckerProduct>

#include "ctcmbqc/error.hpp"
#include "json_io.hpp"

namespace ctcmbqc {

using json = nlohmann::ordered_json;

namespace {

Matrix product_of(const std::vector<Gate> &gates, int n) {
    Matrix u = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
    for (const Gate &g : gates) u = embed_operator(g.unitary_matrix(), n, g.targets) * u;
    return u;
}

void check_gate_list(const std::vector<Gate> &gates, int n, const char *what) {
    for (const Gate &g : gates) {
        if (g.control) throw Error(ErrorCode::Validation, std::string(what) + " gates cannot be classically controlled");
        for (int q : g.targets) {
            if (q < 1 || q > n) throw Error(ErrorCode::Validation, std::string(what) + " gate target out of range");
        }
        if (g.kind == GateKind::U && !is_unitary(g.matrix)) throw Error(ErrorCode::NonUnitary, std::string(what) + " U is not unitary");
    }
}

Gate remap(Gate g, const std::function<int(int)> &f) {
    for (int &q : g.targets) q = f(q);
    return g;
}

}  // namespace

CtcSpec::CtcSpec(int ctc_qubits, std::vector<Gate> v_gates, std::optional<CtcEmbedding> embedding)
    : k_(ctc_qubits), v_gates_(std::move(v_gates)), embedded_(embedding.has_value()), v_is_circuit_(true) {
    if (embedding) embedding_ = std::move(*embedding);
    if (k_ < 1 || k_ > kMaxCtcQubits) throw Error(ErrorCode::Validation, "ctc_qubits must be 1 or 2");
    check_gate_list(v_gates_, 2 * k_, "V");
    v_ = product_of(v_gates_, 2 * k_);
    validate();
}

CtcSpec::CtcSpec(int ctc_qubits, Matrix v, std::optional<CtcEmbedding> embedding)
    : k_(ctc_qubits), v_(std::move(v)), embedded_(embedding.has_value()) {
    if (embedding) embedding_ = std::move(*embedding);
    if (k_ < 1 || k_ > kMaxCtcQubits) throw Error(ErrorCode::Validation, "ctc_qubits must be 1 or 2");
    auto d = Eigen::Index{1} << (2 * k_);
    if (v_.rows() != d || v_.cols() != d) throw Error(ErrorCode::DimensionMismatch, "V must act on 2k qubits");
    if (!is_unitary(v_)) throw Error(ErrorCode::NonUnitary, "V is not unitary");
    validate();
}

void CtcSpec::validate() {
    if (!embedded_) {
        embedding_ = CtcEmbedding{};
        embedding_.qubits = k_;
        for (int i = 1; i <= k_; ++i) embedding_.v_wires.push_back(i);
        return;
    }
    const int n = embedding_.qubits;
    if (n < k_) throw Error(ErrorCode::Validation, "embedding needs at least k register qubits");
    std::set<int> seen;
    for (const Prep &p : embedding_.preps) {
        if (p.qubit < 1 || p.qubit > n) throw Error(ErrorCode::Validation, "embedding preparation out of range");
        if (!seen.insert(p.qubit).second) throw Error(ErrorCode::Validation, "qubit prepared twice");
    }
    if (static_cast<int>(embedding_.v_wires.size()) != k_) throw Error(ErrorCode::Validation, "v_wires must list k wires");
    std::set<int> wires;
    for (int w : embedding_.v_wires) {
        if (w < 1 || w > n) throw Error(ErrorCode::Validation, "v_wire out of range");
        if (!wires.insert(w).second) throw Error(ErrorCode::Validation, "v_wires must be distinct");
    }
    check_gate_list(embedding_.before, n, "before");
    check_gate_list(embedding_.after, n, "after");
}

std::vector<int> CtcSpec::register_inputs() const {
    std::set<int> prepped;
    for (const Prep &p : embedding_.preps) prepped.insert(p.qubit);
    std::vector<int> out;
    for (int w = 1; w <= embedding_.qubits; ++w) {
        if (!prepped.count(w)) out.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::vector<Gate> gates_from_json(const json &arr, const char *what) {
    if (!arr.is_array()) throw Error(ErrorCode::Validation, std::string(what) + " must be an array of gates");
    std::vector<Gate> out;
    for (const auto &g : arr) out.push_back(gate_from_json(g));
    return out;
}

json gates_to_json(const std::vector<Gate> &gates) {
    json arr = json::array();
    for (const Gate &g : gates) arr.push_back(gate_to_json(g));
    return arr;
}

}  // namespace

CtcSpec parse_ctc_spec(const std::string &text) {
    json doc = parse_json_document(text);
    try {
        if (!doc.is_object()) throw Error(ErrorCode::Parse, "CTC spec must be a JSON object", 1, 1);
        int k = doc.value("ctc_qubits", 1);
        std::optional<CtcEmbedding> emb;
        if (doc.contains("embedding")) {
            const json &e = doc.at("embedding");
            CtcEmbedding out;
            out.qubits = e.at("qubits").get<int>();
            if (e.contains("preps")) {
                for (const auto &p : e.at("preps")) {
                    auto s = p.value("state", std::string("plus"));
                    if (s != "plus" && s != "zero") throw Error(ErrorCode::Validation, "preparation state must be plus or zero");
                    out.preps.push_back({p.at("q").get<int>(), s == "plus" ? PrepState::Plus : PrepState::Zero});
                }
            }
            if (e.contains("before")) out.before = gates_from_json(e.at("before"), "before");
            if (e.contains("after")) out.after = gates_from_json(e.at("after"), "after");
            for (const auto &w : e.at("v_wires")) out.v_wires.push_back(w.get<int>());
            emb = std::move(out);
        }
        const json &v = doc.at("V");
        if (v.contains("circuit")) return CtcSpec(k, gates_from_json(v.at("circuit"), "V"), std::move(emb));
        if (v.contains("matrix")) {
            std::vector<int> targets;
            for (int q = 1; q <= 2 * k; ++q) targets.push_back(q);
            json as_gate = {{"gate", "U"}, {"targets", targets}, {"matrix", v.at("matrix")}};
            return CtcSpec(k, gate_from_json(as_gate).matrix, std::move(emb));
        }
        throw Error(ErrorCode::Validation, "V needs a circuit or a matrix");
    } catch (const json::exception &e) {
        throw Error(ErrorCode::Validation, e.what());
    }
}

std::string serialize_ctc_spec(const CtcSpec &spec) {
    json doc;
    doc["ctc_qubits"] = spec.ctc_qubits();
    if (spec.v_is_circuit()) {
        doc["V"] = {{"circuit", gates_to_json(spec.v_gates())}};
    } else {
        std::vector<int> targets;
        for (int q = 1; q <= 2 * spec.ctc_qubits(); ++q) targets.push_back(q);
        doc["V"] = {{"matrix", gate_to_json(Gate::unitary(spec.v(), targets)).at("matrix")}};
    }
    if (spec.embedded()) {
        const CtcEmbedding &e = spec.embedding();
        json emb;
        emb["qubits"] = e.qubits;
        json preps = json::array();
        for (const Prep &p : e.preps) preps.push_back({{"q", p.qubit}, {"state", p.state == PrepState::Plus ? "plus" : "zero"}});
        emb["preps"] = preps;
        emb["before"] = gates_to_json(e.before);
        emb["after"] = gates_to_json(e.after);
        emb["v_wires"] = e.v_wires;
        doc["embedding"] = emb;
    }
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// BSS

namespace {

// Physical qubit of each register wire at the end of the BSS circuit.
int bss_output_qubit(const CtcSpec &spec, int wire) {
    const int k = spec.ctc_qubits();
    const auto &vw = spec.embedding().v_wires;
    auto it = std::find(vw.begin(), vw.end(), wire);
    if (it != vw.end()) return k + 1 + static_cast<int>(it - vw.begin());
    return 2 * k + wire;
}

}  // namespace

Circuit build_bss_circuit(const CtcSpec &spec) {
    const int k = spec.ctc_qubits();
    const CtcEmbedding &e = spec.embedding();
    const int n = 2 * k + e.qubits;
    auto reg = [k](int w) { return 2 * k + w; };

    std::vector<Prep> preps;
    for (const Prep &p : e.preps) preps.push_back({reg(p.qubit), p.state});
    std::vector<Event> timeline;
    for (int i = 1; i <= k; ++i) timeline.push_back(BellPrep{k + i, i});
    for (const Gate &g : e.before) timeline.push_back(remap(g, reg));
    auto v_map = [&](int q) { return q <= k ? reg(e.v_wires[static_cast<std::size_t>(q - 1)]) : q; };
    if (spec.v_is_circuit()) {
        for (const Gate &g : spec.v_gates()) timeline.push_back(remap(g, v_map));
    } else {
        std::vector<int> targets;
        for (int q = 1; q <= 2 * k; ++q) targets.push_back(v_map(q));
        timeline.push_back(Gate::unitary(spec.v(), targets));
    }
    for (int i = 1; i <= k; ++i) timeline.push_back(BellMeasurement{reg(e.v_wires[static_cast<std::size_t>(i - 1)]), i, 0});
    for (const Gate &g : e.after) timeline.push_back(remap(g, [&](int w) { return bss_output_qubit(spec, w); }));
    return Circuit(n, std::move(preps), std::move(timeline));
}

namespace {

// Positions (1-based, within the circuit's output list) of the register wires.
std::vector<int> register_order_positions(const CtcSpec &spec, const std::vector<int> &outputs) {
    std::vector<int> keep;
    for (int w = 1; w <= spec.embedding().qubits; ++w) {
        int q = bss_output_qubit(spec, w);
        auto it = std::find(outputs.begin(), outputs.end(), q);
        if (it == outputs.end()) throw Error(ErrorCode::Validation, "register wire missing from the BSS outputs");
        keep.push_back(static_cast<int>(it - outputs.begin()) + 1);
    }
    return keep;
}

}  // namespace

BssResult bss_simulate(const CtcSpec &spec, const StateVector &input) {
    Circuit c = build_bss_circuit(spec);
    if (input.num_qubits() != static_cast<int>(c.input_qubits().size())) {
        throw Error(ErrorCode::DimensionMismatch, "input must cover the unprepared register wires");
    }
    BranchSet bs = simulate(c, input);
    BssResult r;
    const auto keep = register_order_positions(spec, bs.output_qubits);
    const int n_out = static_cast<int>(bs.output_qubits.size());
    Vector raw = Vector::Zero(Eigen::Index{1} << n_out);
    // Every measurement is postselected, so there is exactly one branch.
    for (const Branch &b : bs.branches) raw += extract_qubits(b.state.amplitudes(), n_out, keep);
    r.raw_state = StateVector(raw);
    r.success_probability = raw.squaredNorm();
    r.grandfather_paradox = r.success_probability < kGrandfatherThreshold;
    if (!r.grandfather_paradox) r.output_state = r.raw_state.normalized();
    return r;
}

// ---------------------------------------------------------------------------
// Deutsch

Matrix deutsch_unitary(const CtcSpec &spec) {
    const int k = spec.ctc_qubits();
    const CtcEmbedding &e = spec.embedding();
    const int n = k + e.qubits;
    auto reg = [k](int w) { return k + w; };
    Matrix u = Matrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
    for (const Gate &g : e.before) u = embed_operator(g.unitary_matrix(), n, remap(g, reg).targets) * u;
    std::vector<int> v_targets;
    for (int q = 1; q <= k; ++q) v_targets.push_back(reg(e.v_wires[static_cast<std::size_t>(q - 1)]));
    for (int q = 1; q <= k; ++q) v_targets.push_back(q);
    u = embed_operator(spec.v(), n, v_targets) * u;
    for (int q = 1; q <= k; ++q) {
        std::vector<int> pair{q, reg(e.v_wires[static_cast<std::size_t>(q - 1)])};
        u = embed_operator(gates::swap(), n, pair) * u;
    }
    for (const Gate &g : e.after) u = embed_operator(g.unitary_matrix(), n, remap(g, reg).targets) * u;
    return u;
}

Matrix register_state(const CtcSpec &spec, const DensityMatrix &rho_in) {
    const CtcEmbedding &e = spec.embedding();
    const auto inputs = spec.register_inputs();
    if (rho_in.num_qubits() != static_cast<int>(inputs.size())) {
        throw Error(ErrorCode::DimensionMismatch, "input must cover the unprepared register wires");
    }
    // rho_in on the inputs, then the prepared wires in listed order.
    Matrix full = rho_in.matrix();
    std::vector<int> source(inputs);
    for (const Prep &p : e.preps) {
        Matrix one = p.state == PrepState::Plus ? DensityMatrix::pure(StateVector::plus()).matrix()
                                                : DensityMatrix::pure(StateVector::basis(1, 0)).matrix();
        full = Eigen::kroneckerProduct(full, one).eval();
        source.push_back(p.qubit);
    }
    std::vector<int> order(static_cast<std::size_t>(e.qubits));
    for (int w = 1; w <= e.qubits; ++w) {
        auto it = std::find(source.begin(), source.end(), w);
        order[static_cast<std::size_t>(w - 1)] = static_cast<int>(it - source.begin()) + 1;
    }
    return permute_qubits(full, e.qubits, order);
}

namespace {

Matrix evolve(const Matrix &u, const Matrix &rho_ctc, const Matrix &rho_reg) {
    Matrix joint = Eigen::kroneckerProduct(rho_ctc, rho_reg).eval();
    return u * joint * u.adjoint();
}

std::vector<int> range_list(int first, int last) {
    std::vector<int> out;
    for (int q = first; q <= last; ++q) out.push_back(q);
    return out;
}

Matrix apply_superop(const Matrix &superop, const Matrix &rho) {
    const auto d = rho.rows();
    Vector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
    }
    Vector w = superop * v;
    Matrix out(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = w(i * d + j);
    }
    return out;
}

Matrix from_pauli_coefficients(const Eigen::VectorXd &c, const std::vector<Matrix> &basis) {
    const auto d = basis[0].rows();
    Matrix out = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < basis.size(); ++a) out += c(static_cast<Eigen::Index>(a)) * basis[a];
    return out / static_cast<double>(d);
}

// Hermitian part, for numerical hygiene before wrapping in DensityMatrix.
DensityMatrix clean_state(const Matrix &m) {
    Matrix h = (m + m.adjoint()) / 2.0;
    return DensityMatrix(h, 1e-8);
}

}  // namespace

Matrix deutsch_superoperator(const CtcSpec &spec, const DensityMatrix &rho_in) {
    const int k = spec.ctc_qubits();
    const int n = k + spec.embedding().qubits;
    const Matrix u = deutsch_unitary(spec);
    const Matrix reg = register_state(spec, rho_in);
    const auto keep = range_list(1, k);
    const Eigen::Index d = Eigen::Index{1} << k;
    Matrix superop = Matrix::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            Matrix out = partial_trace(evolve(u, e, reg), n, keep);
            for (Eigen::Index a = 0; a < d; ++a) {
                for (Eigen::Index b = 0; b < d; ++b) superop(a * d + b, i * d + j) = out(a, b);
            }
        }
    }
    return superop;
}

std::vector<Matrix> pauli_basis(int k) {
    const Matrix single[4] = {gates::identity(), gates::x(), gates::y(), gates::z()};
    std::vector<Matrix> out{Matrix::Identity(1, 1)};
    for (int q = 0; q < k; ++q) {
        std::vector<Matrix> next;
        for (const Matrix &m : out) {
            for (const Matrix &p : single) next.push_back(Eigen::kroneckerProduct(m, p).eval());
        }
        out = std::move(next);
    }
    return out;
}

Eigen::MatrixXd pauli_transfer_matrix(const Matrix &superop, int k) {
    const auto basis = pauli_basis(k);
    const auto m = static_cast<Eigen::Index>(basis.size());
    const double d = std::ldexp(1.0, k);
    Eigen::MatrixXd r(m, m);
    for (Eigen::Index b = 0; b < m; ++b) {
        Matrix image = apply_superop(superop, basis[static_cast<std::size_t>(b)]);
        for (Eigen::Index a = 0; a < m; ++a) r(a, b) = (basis[static_cast<std::size_t>(a)] * image).trace().real() / d;
    }
    return r;
}

double fixed_point_residual(const Matrix &superop, const Matrix &rho) { return trace_norm(rho - apply_superop(superop, rho)); }

DensityMatrix deutsch_output(const CtcSpec &spec, const DensityMatrix &rho_ctc, const DensityMatrix &rho_in) {
    const int k = spec.ctc_qubits();
    const int n = k + spec.embedding().qubits;
    Matrix joint = evolve(deutsch_unitary(spec), rho_ctc.matrix(), register_state(spec, rho_in));
    return clean_state(partial_trace(joint, n, range_list(k + 1, n)));
}

namespace {

constexpr double kKernelTol = 1e-9;
constexpr int kCesaroDoublings = 24;
constexpr double kCesaroTol = 1e-6;
constexpr std::size_t kMaxExtremals = 8;

// Largest t in [0, t_max] with rho + t*dir positive semidefinite.
double boundary_step(const Matrix &rho, const Matrix &dir) {
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (min_eigenvalue(rho + mid * dir) >= -1e-12) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

DeutschSolution deutsch_fixed_points(const CtcSpec &spec, const DensityMatrix &rho_in) {
    const int k = spec.ctc_qubits();
    const Matrix superop = deutsch_superoperator(spec, rho_in);
    const Eigen::MatrixXd r = pauli_transfer_matrix(superop, k);
    const auto m = r.rows();
    const auto basis = pauli_basis(k);

    // Right and left null spaces of R - I from one SVD.
    Eigen::MatrixXd a = r - Eigen::MatrixXd::Identity(m, m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    std::vector<Eigen::Index> null_idx;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (svd.singularValues()(i) < kKernelTol) null_idx.push_back(i);
    }
    const auto dim = static_cast<Eigen::Index>(null_idx.size());
    if (dim == 0) throw Error(ErrorCode::VerificationFailed, "channel has no fixed point");
    Eigen::MatrixXd kr(m, dim), kl(m, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        kr.col(c) = svd.matrixV().col(null_idx[static_cast<std::size_t>(c)]);
        kl.col(c) = svd.matrixU().col(null_idx[static_cast<std::size_t>(c)]);
    }

    // Eigenvalue 1 is semisimple for a channel, so the spectral projector is
    // the Cesaro limit of R^t.
    Eigen::MatrixXd projector = kr * (kl.transpose() * kr).inverse() * kl.transpose();
    Eigen::VectorXd e0 = Eigen::VectorXd::Unit(m, 0);
    Eigen::VectorXd canonical = projector * e0;

    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd power = r;
    for (int it = 0; it < kCesaroDoublings; ++it) {
        sum += power * sum;
        power = (power * power).eval();
    }
    Eigen::VectorXd cesaro = sum * e0 / std::ldexp(1.0, kCesaroDoublings);

    DeutschSolution sol;
    sol.rho_in = rho_in;
    sol.cesaro_residual = (cesaro - canonical).norm();
    sol.converged = sol.cesaro_residual < kCesaroTol;
    sol.canonical_rho_ctc = clean_state(from_pauli_coefficients(canonical, basis));
    sol.canonical_rho_out = deutsch_output(spec, sol.canonical_rho_ctc, rho_in);

    // Traceless directions: kernel combinations with no identity component.
    Eigen::MatrixXd row = kr.row(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> rsvd(row, Eigen::ComputeFullV);
    const double sqrt_d = std::sqrt(std::ldexp(1.0, k));
    for (Eigen::Index c = 1; c < dim; ++c) {
        Eigen::VectorXd v = kr * rsvd.matrixV().col(c);
        Matrix dir = from_pauli_coefficients(v, basis) * sqrt_d;
        dir = (dir + dir.adjoint()).eval() / 2.0;
        sol.fixed_point_basis.push_back(dir);
    }
    for (const Matrix &dir : sol.fixed_point_basis) {
        for (double sign : {1.0, -1.0}) {
            if (sol.extremal_rho_ctc.size() >= kMaxExtremals) break;
            const Matrix base = sol.canonical_rho_ctc.matrix();
            double t = boundary_step(base, sign * dir);
            DensityMatrix ext = clean_state(base + t * sign * dir);
            sol.extremal_rho_ctc.push_back(ext);
            sol.extremal_rho_out.push_back(deutsch_output(spec, ext, rho_in));
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Comparison

std::vector<BlochVector> bloch_grid62() {
    std::vector<BlochVector> out{{0, 0, 1}, {0, 0, -1}};
    for (int i = 1; i <= 6; ++i) {
        double polar = i * kPi / 7.0;
        for (int j = 0; j < 10; ++j) {
            double azimuth = 2.0 * kPi * j / 10.0;
            out.push_back({std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)});
        }
    }
    return out;
}

ConflictReport compare_models(const CtcSpec &spec, const std::vector<DensityMatrix> &grid, double tol) {
    if (spec.register_inputs().size() != 1) throw Error(ErrorCode::DimensionMismatch, "comparison needs one register input");
    Circuit c = build_bss_circuit(spec);
    std::vector<int> outputs;
    for (int w = 1; w <= spec.embedding().qubits; ++w) outputs.push_back(bss_output_qubit(spec, w));
    const ChoiMatrix bss = postselected_map(c, c.input_qubits(), outputs).choi;
    const bool single_out = spec.embedding().qubits == 1;

    ConflictReport report;
    for (const DensityMatrix &rho : grid) {
        if (rho.num_qubits() != 1) throw Error(ErrorCode::DimensionMismatch, "grid states must be single-qubit");
        ConflictRow row;
        row.input_bloch = to_bloch(rho);
        Matrix out = bss.apply(rho.matrix());
        row.bss_p = out.trace().real();
        row.grandfather = row.bss_p < kGrandfatherThreshold;
        DeutschSolution sol = deutsch_fixed_points(spec, rho);
        const Matrix &dout = sol.canonical_rho_out.matrix();
        row.deutsch_purity = sol.canonical_rho_out.purity();
        if (single_out) row.deutsch_bloch = to_bloch(dout);
        if (!row.grandfather) {
            Matrix bout = out / row.bss_p;
            row.bss_purity = (bout * bout).trace().real();
            row.trace_distance = trace_distance(bout, dout);
            row.agree = row.trace_distance < tol;
            if (single_out) row.bss_bloch = to_bloch(bout);
        }
        if (row.agree) report.agreement.push_back(report.rows.size());
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// CTC extraction

namespace {

bool event_touches(const Event &ev, int q) {
    if (auto g = std::get_if<Gate>(&ev)) return std::find(g->targets.begin(), g->targets.end(), q) != g->targets.end();
    if (auto m = std::get_if<Measurement>(&ev)) return m->qubit == q;
    if (auto b = std::get_if<BellPrep>(&ev)) return b->first == q || b->second == q;
    const auto &bm = std::get<BellMeasurement>(ev);
    return bm.first == q || bm.second == q;
}

}  // namespace

Circuit extract_ctc(const Circuit &c) {
    if (!c.ctc_wires().empty()) throw Error(ErrorCode::Validation, "circuit already has CTC wires");
    const auto signals = c.anachronical_signals();
    std::map<int, int> carrier;  // signal -> fresh qubit
    int n = c.num_qubits();
    for (int s : signals) {
        std::size_t ev = c.measurement_event(s);
        const auto &m = std::get<Measurement>(c.timeline()[ev]);
        if (m.basis != MeasureBasis::Z || m.postselect) {
            throw Error(ErrorCode::Validation, "only unpostselected Z measurements can be sent back", ev);
        }
        carrier[s] = ++n;
    }

    std::vector<Event> timeline;
    std::map<int, std::size_t> reentry;
    std::vector<CtcWire> wires;
    for (std::size_t i = 0; i < c.timeline().size(); ++i) {
        const Event &ev = c.timeline()[i];
        if (auto g = std::get_if<Gate>(&ev); g && g->control && carrier.count(g->control->signal)) {
            int r = carrier.at(g->control->signal);
            if (g->targets.size() != 1 || (g->kind != GateKind::X && g->kind != GateKind::Z)) {
                throw Error(ErrorCode::UnsupportedGate, "only X and Z can be made coherently controlled", i);
            }
            reentry.emplace(g->control->signal, timeline.size());
            timeline.push_back(g->kind == GateKind::X ? Gate::cx(r, g->targets[0]) : Gate::cz(r, g->targets[0]));
            continue;
        }
        if (auto m = std::get_if<Measurement>(&ev); m && carrier.count(m->qubit)) {
            const int q = m->qubit;
            const std::size_t back = reentry.at(q);
            std::optional<std::size_t> exit;
            for (std::size_t j = timeline.size(); j-- > back;) {
                if (event_touches(timeline[j], q)) {
                    exit = j;
                    break;
                }
            }
            if (!exit) {
                // Nothing touches the wire after the reentry: mark the exit with an identity.
                exit = timeline.size();
                timeline.push_back(Gate::unitary(gates::identity(), {q}));
            }
            wires.push_back(CtcWire{*exit, back, q, carrier.at(q)});
            continue;
        }
        timeline.push_back(ev);
    }
    return Circuit(n, c.preps(), std::move(timeline), std::move(wires));
}

}  // namespace ctcmbqc
