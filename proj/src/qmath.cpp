#include "ctcmbqc/qmath.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "ctcmbqc/error.hpp"

namespace ctcmbqc {

namespace {

// Bit position (from the least significant end) of 1-based qubit q.
inline int shift_of(int num_qubits, int q) { return num_qubits - q; }

void check_qubits(int num_qubits, std::span<const int> qubits) {
    for (std::size_t a = 0; a < qubits.size(); ++a) {
        if (qubits[a] < 1 || qubits[a] > num_qubits) {
            throw Error(ErrorCode::DimensionMismatch,
                        "qubit " + std::to_string(qubits[a]) + " outside 1.." + std::to_string(num_qubits));
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (qubits[a] == qubits[b]) {
                throw Error(ErrorCode::DimensionMismatch, "repeated qubit " + std::to_string(qubits[a]));
            }
        }
    }
}

// Scatters the bits of `local` (k bits, first target most significant) onto
// the target positions of a full index.
std::size_t deposit(std::size_t local, int num_qubits, std::span<const int> targets) {
    std::size_t out = 0;
    int k = static_cast<int>(targets.size());
    for (int t = 0; t < k; ++t) {
        if ((local >> (k - 1 - t)) & 1U) out |= std::size_t{1} << shift_of(num_qubits, targets[t]);
    }
    return out;
}

std::size_t target_mask(int num_qubits, std::span<const int> targets) {
    std::size_t mask = 0;
    for (int q : targets) mask |= std::size_t{1} << shift_of(num_qubits, q);
    return mask;
}

std::vector<int> complement(int num_qubits, std::span<const int> keep) {
    std::vector<int> rest;
    for (int q = 1; q <= num_qubits; ++q) {
        if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
    }
    return rest;
}

}  // namespace

int qubit_count_for_dimension(std::size_t dimension) {
    if (dimension == 0 || (dimension & (dimension - 1)) != 0) {
        throw Error(ErrorCode::DimensionMismatch, "dimension " + std::to_string(dimension) + " is not a power of two");
    }
    int n = 0;
    while ((std::size_t{1} << n) < dimension) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector() : amplitudes_(Vector::Ones(1)) {}

StateVector::StateVector(Vector amplitudes, double tol) : amplitudes_(std::move(amplitudes)) {
    num_qubits_ = qubit_count_for_dimension(static_cast<std::size_t>(amplitudes_.size()));
    if (amplitudes_.squaredNorm() > 1.0 + tol) {
        throw Error(ErrorCode::NonPhysical, "state norm squared exceeds 1");
    }
}

StateVector StateVector::basis(int num_qubits, std::size_t index) {
    Vector v = Vector::Zero(Eigen::Index{1} << num_qubits);
    if (index >= static_cast<std::size_t>(v.size())) {
        throw Error(ErrorCode::DimensionMismatch, "basis index out of range");
    }
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
}

StateVector StateVector::plus() { return plus_theta(0.0); }

StateVector StateVector::plus_theta(double theta) {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), theta);
    return StateVector(std::move(v));
}

StateVector StateVector::minus_theta(double theta) {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), -std::polar(1.0 / std::sqrt(2.0), theta);
    return StateVector(std::move(v));
}

StateVector StateVector::from_amplitudes(std::initializer_list<Complex> amplitudes) {
    Vector v(static_cast<Eigen::Index>(amplitudes.size()));
    Eigen::Index i = 0;
    for (const Complex &a : amplitudes) v(i++) = a;
    return StateVector(std::move(v));
}

StateVector StateVector::normalized() const {
    double n = amplitudes_.norm();
    if (n < 1e-300) throw Error(ErrorCode::NonPhysical, "cannot normalize a zero vector");
    return StateVector(amplitudes_ / n);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix() : matrix_(Matrix::Ones(1, 1)) {}

DensityMatrix::DensityMatrix(Matrix matrix, double tol) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "density matrix is not square");
    }
    num_qubits_ = qubit_count_for_dimension(static_cast<std::size_t>(matrix_.rows()));
    if (!is_hermitian(matrix_, tol)) throw Error(ErrorCode::NonPhysical, "density matrix is not Hermitian");
    double tr = trace();
    if (tr < -tol || tr > 1.0 + tol) throw Error(ErrorCode::NonPhysical, "density matrix trace outside [0,1]");
    if (min_eigenvalue(matrix_) < -tol) throw Error(ErrorCode::NonPhysical, "density matrix is not PSD");
}

DensityMatrix DensityMatrix::pure(const StateVector &psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
    auto d = Eigen::Index{1} << num_qubits;
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

// ---------------------------------------------------------------------------
// ChoiMatrix

ChoiMatrix::ChoiMatrix(Matrix matrix, int n_in, int n_out) : matrix_(std::move(matrix)), n_in_(n_in), n_out_(n_out) {
    auto d = Eigen::Index{1} << (n_in + n_out);
    if (matrix_.rows() != d || matrix_.cols() != d) {
        throw Error(ErrorCode::DimensionMismatch, "Choi matrix size does not match (n_in, n_out)");
    }
}

Matrix ChoiMatrix::apply(const Matrix &rho) const {
    auto din = Eigen::Index{1} << n_in_;
    auto dout = Eigen::Index{1} << n_out_;
    if (rho.rows() != din || rho.cols() != din) {
        throw Error(ErrorCode::DimensionMismatch, "input operator does not match the map's input dimension");
    }
    Matrix out = Matrix::Zero(dout, dout);
    for (Eigen::Index i = 0; i < din; ++i) {
        for (Eigen::Index j = 0; j < din; ++j) {
            if (rho(i, j) == Complex(0)) continue;
            out += rho(i, j) * matrix_.block(i * dout, j * dout, dout, dout);
        }
    }
    return out;
}

Matrix ChoiMatrix::input_marginal() const {
    auto din = Eigen::Index{1} << n_in_;
    auto dout = Eigen::Index{1} << n_out_;
    Matrix out(din, din);
    for (Eigen::Index i = 0; i < din; ++i) {
        for (Eigen::Index j = 0; j < din; ++j) out(i, j) = matrix_.block(i * dout, j * dout, dout, dout).trace();
    }
    return out;
}

ChoiMatrix ChoiMatrix::renormalized() const {
    double tr = trace();
    if (std::abs(tr) < 1e-300) throw Error(ErrorCode::NonPhysical, "cannot renormalize a zero map");
    return scaled(static_cast<double>(Eigen::Index{1} << n_in_) / tr);
}

ChoiMatrix ChoiMatrix::scaled(double factor) const { return ChoiMatrix(matrix_ * factor, n_in_, n_out_); }

// ---------------------------------------------------------------------------
// Products and reductions

StateVector tensor(const StateVector &a, const StateVector &b) {
    return StateVector(Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes()).eval());
}

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    return DensityMatrix(Eigen::kroneckerProduct(a.matrix(), b.matrix()).eval());
}

QuantumState tensor(const QuantumState &a, const QuantumState &b) {
    if (a.index() != b.index()) {
        throw Error(ErrorCode::KindMismatch, "tensor of a state vector with a density matrix");
    }
    if (std::holds_alternative<StateVector>(a)) {
        return tensor(std::get<StateVector>(a), std::get<StateVector>(b));
    }
    return tensor(std::get<DensityMatrix>(a), std::get<DensityMatrix>(b));
}

Matrix partial_trace(const Matrix &rho, int num_qubits, std::span<const int> keep) {
    check_qubits(num_qubits, keep);
    std::vector<int> traced = complement(num_qubits, keep);
    auto dk = std::size_t{1} << keep.size();
    auto dt = std::size_t{1} << traced.size();
    std::vector<std::size_t> kidx(dk), tidx(dt);
    for (std::size_t i = 0; i < dk; ++i) kidx[i] = deposit(i, num_qubits, keep);
    for (std::size_t t = 0; t < dt; ++t) tidx[t] = deposit(t, num_qubits, traced);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t i = 0; i < dk; ++i) {
        for (std::size_t j = 0; j < dk; ++j) {
            Complex acc = 0;
            for (std::size_t t = 0; t < dt; ++t) {
                acc += rho(static_cast<Eigen::Index>(kidx[i] | tidx[t]), static_cast<Eigen::Index>(kidx[j] | tidx[t]));
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const int> keep) {
    std::vector<int> sorted(keep.begin(), keep.end());
    std::sort(sorted.begin(), sorted.end());
    return DensityMatrix(partial_trace(rho.matrix(), rho.num_qubits(), sorted));
}

DensityMatrix to_density(const BlochVector &v) {
    if (v.norm() > 1.0 + 1e-10) throw Error(ErrorCode::NonPhysical, "Bloch vector longer than 1");
    Matrix m = (gates::identity() + v.x * gates::x() + v.y * gates::y() + v.z * gates::z()) / 2.0;
    return DensityMatrix(std::move(m));
}

BlochVector to_bloch(const Matrix &rho) {
    if (rho.rows() != 2 || rho.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "Bloch vector needs one qubit");
    return {2.0 * rho(0, 1).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

BlochVector to_bloch(const DensityMatrix &rho) { return to_bloch(rho.matrix()); }

// ---------------------------------------------------------------------------
// Norms and map utilities

double trace_norm(const Matrix &m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

double trace_distance(const Matrix &rho, const Matrix &sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "trace distance between operators of different size");
    }
    return 0.5 * trace_norm(rho - sigma);
}

double choi_distance(const ChoiMatrix &a, const ChoiMatrix &b) {
    if (a.n_in() != b.n_in() || a.n_out() != b.n_out()) {
        throw Error(ErrorCode::DimensionMismatch, "Choi matrices of different shape");
    }
    return trace_norm(a.matrix() - b.matrix());
}

double fidelity(const StateVector &a, const StateVector &b) {
    if (a.dimension() != b.dimension()) throw Error(ErrorCode::DimensionMismatch, "fidelity of different sizes");
    double na = a.norm_squared();
    double nb = b.norm_squared();
    if (na < 1e-300 || nb < 1e-300) return 0.0;
    return std::norm(a.amplitudes().dot(b.amplitudes())) / (na * nb);
}

ChoiMatrix choi_of_kraus(std::span<const Matrix> kraus, int n_in, int n_out) {
    auto din = Eigen::Index{1} << n_in;
    auto dout = Eigen::Index{1} << n_out;
    Matrix c = Matrix::Zero(din * dout, din * dout);
    for (const Matrix &k : kraus) {
        if (k.rows() != dout || k.cols() != din) throw Error(ErrorCode::DimensionMismatch, "Kraus operator shape");
        // Column block i of vec = K|i>, so C = sum_K vec(K) vec(K)^dagger with
        // vec(K) = sum_i |i> (x) K|i>.
        Vector v(din * dout);
        for (Eigen::Index i = 0; i < din; ++i) v.segment(i * dout, dout) = k.col(i);
        c += v * v.adjoint();
    }
    return ChoiMatrix(std::move(c), n_in, n_out);
}

ChoiMatrix choi_of_unitary(const Matrix &u) {
    int n = qubit_count_for_dimension(static_cast<std::size_t>(u.rows()));
    Matrix k = u;
    return choi_of_kraus(std::span<const Matrix>(&k, 1), n, n);
}

ChoiMatrix choi_from_images(const std::vector<Vector> &images, int num_out_qubits, std::span<const int> keep) {
    int n_in = qubit_count_for_dimension(images.size());
    check_qubits(num_out_qubits, keep);
    std::vector<int> order(keep.begin(), keep.end());
    for (int q : complement(num_out_qubits, keep)) order.push_back(q);
    auto din = static_cast<Eigen::Index>(images.size());
    auto dkeep = Eigen::Index{1} << keep.size();
    auto drest = Eigen::Index{1} << (num_out_qubits - static_cast<int>(keep.size()));
    // Reordered images: row index = keep index * drest + rest index.
    std::vector<Vector> reordered;
    reordered.reserve(images.size());
    for (const Vector &img : images) {
        if (img.size() != (Eigen::Index{1} << num_out_qubits)) {
            throw Error(ErrorCode::DimensionMismatch, "image size does not match the output register");
        }
        reordered.push_back(extract_qubits(img, num_out_qubits, order));
    }
    Matrix c = Matrix::Zero(din * dkeep, din * dkeep);
    Vector w(din * dkeep);
    for (Eigen::Index r = 0; r < drest; ++r) {
        for (Eigen::Index i = 0; i < din; ++i) {
            for (Eigen::Index a = 0; a < dkeep; ++a) w(i * dkeep + a) = reordered[static_cast<std::size_t>(i)](a * drest + r);
        }
        c += w * w.adjoint();
    }
    return ChoiMatrix(std::move(c), n_in, static_cast<int>(keep.size()));
}

bool is_unitary(const Matrix &u, double tol) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Matrix &m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const Matrix &hermitian) {
    Matrix h = (hermitian + hermitian.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Kernels

void apply_operator(Vector &state, int num_qubits, std::span<const int> targets, const Matrix &op) {
    check_qubits(num_qubits, targets);
    auto k = targets.size();
    auto dk = std::size_t{1} << k;
    if (static_cast<std::size_t>(op.rows()) != dk || static_cast<std::size_t>(op.cols()) != dk) {
        throw Error(ErrorCode::DimensionMismatch, "operator size does not match its targets");
    }
    std::vector<std::size_t> offsets(dk);
    for (std::size_t i = 0; i < dk; ++i) offsets[i] = deposit(i, num_qubits, targets);
    std::size_t mask = target_mask(num_qubits, targets);
    auto dim = static_cast<std::size_t>(state.size());
    Vector local(static_cast<Eigen::Index>(dk));
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & mask) continue;
        for (std::size_t i = 0; i < dk; ++i) local(static_cast<Eigen::Index>(i)) = state(static_cast<Eigen::Index>(base | offsets[i]));
        Vector mapped = op * local;
        for (std::size_t i = 0; i < dk; ++i) state(static_cast<Eigen::Index>(base | offsets[i])) = mapped(static_cast<Eigen::Index>(i));
    }
}

void project_qubits(Vector &state, int num_qubits, std::span<const int> qubits, const Vector &bra_ket) {
    // |0..0><bra| on the selected qubits.
    auto dk = Eigen::Index{1} << qubits.size();
    if (bra_ket.size() != dk) throw Error(ErrorCode::DimensionMismatch, "projector size does not match its qubits");
    Matrix op = Matrix::Zero(dk, dk);
    op.row(0) = bra_ket.adjoint();
    apply_operator(state, num_qubits, qubits, op);
}

Vector extract_qubits(const Vector &state, int num_qubits, std::span<const int> keep) {
    check_qubits(num_qubits, keep);
    auto dk = std::size_t{1} << keep.size();
    Vector out(static_cast<Eigen::Index>(dk));
    for (std::size_t i = 0; i < dk; ++i) out(static_cast<Eigen::Index>(i)) = state(static_cast<Eigen::Index>(deposit(i, num_qubits, keep)));
    return out;
}

Vector embed_qubits(const Vector &sub, int num_qubits, std::span<const int> positions) {
    check_qubits(num_qubits, positions);
    auto dk = std::size_t{1} << positions.size();
    if (static_cast<std::size_t>(sub.size()) != dk) throw Error(ErrorCode::DimensionMismatch, "payload size mismatch");
    Vector out = Vector::Zero(Eigen::Index{1} << num_qubits);
    for (std::size_t i = 0; i < dk; ++i) out(static_cast<Eigen::Index>(deposit(i, num_qubits, positions))) = sub(static_cast<Eigen::Index>(i));
    return out;
}

Matrix embed_operator(const Matrix &op, int num_qubits, std::span<const int> targets) {
    auto d = Eigen::Index{1} << num_qubits;
    Matrix full = Matrix::Identity(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        Vector col = full.col(c);
        apply_operator(col, num_qubits, targets, op);
        full.col(c) = col;
    }
    return full;
}

Matrix permute_qubits(const Matrix &rho, int num_qubits, std::span<const int> order) {
    if (static_cast<int>(order.size()) != num_qubits) throw Error(ErrorCode::DimensionMismatch, "permutation size");
    check_qubits(num_qubits, order);
    auto d = std::size_t{1} << num_qubits;
    // New index whose qubit i carries old qubit order[i].
    std::vector<std::size_t> image(d);
    for (std::size_t old = 0; old < d; ++old) {
        std::size_t idx = 0;
        for (int i = 1; i <= num_qubits; ++i) {
            if ((old >> shift_of(num_qubits, order[i - 1])) & 1U) idx |= std::size_t{1} << shift_of(num_qubits, i);
        }
        image[old] = idx;
    }
    Matrix out(rho.rows(), rho.cols());
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            out(static_cast<Eigen::Index>(image[a]), static_cast<Eigen::Index>(image[b])) =
                rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return out;
}

StateVector random_state(int num_qubits, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(Eigen::Index{1} << num_qubits);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
    v.normalize();
    return StateVector(std::move(v));
}

Matrix random_unitary(int num_qubits, std::mt19937_64 &rng) {
    // QR of a Ginibre matrix with the phase of R's diagonal removed is Haar.
    std::normal_distribution<double> g(0.0, 1.0);
    auto d = Eigen::Index{1} << num_qubits;
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
        Complex diag = r(i, i);
        q.col(i) *= diag / std::abs(diag);
    }
    return q;
}

// ---------------------------------------------------------------------------
// Gates

namespace gates {

Matrix identity(int num_qubits) {
    auto d = Eigen::Index{1} << num_qubits;
    return Matrix::Identity(d, d);
}

Matrix x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix h() { return j(0.0); }

Matrix s() { return phase(kPi / 2); }

Matrix sdg() { return phase(-kPi / 2); }

Matrix c() {
    const Complex a = std::polar(1.0 / std::sqrt(2.0), kPi / 4);
    const Complex b = std::polar(1.0 / std::sqrt(2.0), -kPi / 4);
    Matrix m(2, 2);
    m << a, b, b, a;
    return m;
}

Matrix cdg() { return c().adjoint(); }

Matrix j(double theta) {
    const double r = 1.0 / std::sqrt(2.0);
    const Complex e = std::polar(r, theta);
    Matrix m(2, 2);
    m << r, e, r, -e;
    return m;
}

Matrix phase(double theta) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 1) = std::polar(1.0, theta);
    return m;
}

Matrix cz() {
    Matrix m = Matrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
}

Matrix cx() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

Matrix swap() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
}

}  // namespace gates

Vector bell_state(int index) {
    if (index < 0 || index > 3) throw Error(ErrorCode::Validation, "Bell index must be in 0..3");
    int xbit = index >> 1;
    int ybit = index & 1;
    const double r = 1.0 / std::sqrt(2.0);
    Vector v = Vector::Zero(4);
    v(ybit) = r;
    v(2 + (1 - ybit)) = xbit ? -r : r;
    return v;
}

}  // namespace ctcmbqc
