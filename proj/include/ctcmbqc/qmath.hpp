#pragma once

// Dense complex linear algebra for few-qubit systems.
//
// Qubits are numbered from 1 at every public interface. Qubit 1 is the most
// significant bit of an amplitude index (big-endian), so |q1 q2 ... qn> sits at
// index q1*2^(n-1) + ... + qn.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ctcmbqc {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kPi = 3.14159265358979323846;

/// Pure (possibly subnormalized) state over n qubits.
class StateVector {
   public:
    /// The 0-qubit state with amplitude 1.
    StateVector();
    explicit StateVector(Vector amplitudes, double tol = kDefaultTol);

    static StateVector basis(int num_qubits, std::size_t index);
    static StateVector plus();
    static StateVector plus_theta(double theta);
    static StateVector minus_theta(double theta);
    static StateVector from_amplitudes(std::initializer_list<Complex> amplitudes);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
    const Vector &amplitudes() const noexcept { return amplitudes_; }
    Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
    double norm_squared() const { return amplitudes_.squaredNorm(); }
    /// Rescaled to unit norm; throws NonPhysical on a zero vector.
    StateVector normalized() const;

   private:
    Vector amplitudes_;
    int num_qubits_ = 0;
};

/// Mixed state. Construction checks Hermiticity, trace in [0,1] and PSD.
class DensityMatrix {
   public:
    DensityMatrix();
    explicit DensityMatrix(Matrix matrix, double tol = kDefaultTol);

    static DensityMatrix pure(const StateVector &psi);
    static DensityMatrix maximally_mixed(int num_qubits);

    int num_qubits() const noexcept { return num_qubits_; }
    const Matrix &matrix() const noexcept { return matrix_; }
    double trace() const { return matrix_.trace().real(); }
    double purity() const;

   private:
    Matrix matrix_;
    int num_qubits_ = 0;
};

struct BlochVector {
    double x = 0;
    double y = 0;
    double z = 0;

    double norm() const;
    bool operator==(const BlochVector &) const = default;
};

/// Choi matrix sum_ij |i><j| (x) Phi(|i><j|), input factor first. Unnormalized:
/// trace equals 2^n_in for a trace-preserving map.
class ChoiMatrix {
   public:
    ChoiMatrix() = default;
    ChoiMatrix(Matrix matrix, int n_in, int n_out);

    const Matrix &matrix() const noexcept { return matrix_; }
    int n_in() const noexcept { return n_in_; }
    int n_out() const noexcept { return n_out_; }
    double trace() const { return matrix_.trace().real(); }

    /// Phi(rho) = Tr_in[(rho^T (x) I) C].
    Matrix apply(const Matrix &rho) const;
    /// Tr_out C; equals the identity for a trace-preserving map.
    Matrix input_marginal() const;
    /// Rescaled to trace 2^n_in (the trace of a trace-preserving map).
    ChoiMatrix renormalized() const;
    ChoiMatrix scaled(double factor) const;

   private:
    Matrix matrix_;
    int n_in_ = 0;
    int n_out_ = 0;
};

using QuantumState = std::variant<StateVector, DensityMatrix>;

int qubit_count_for_dimension(std::size_t dimension);

StateVector tensor(const StateVector &a, const StateVector &b);
DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);
/// Throws KindMismatch when the operands are of different kinds.
QuantumState tensor(const QuantumState &a, const QuantumState &b);

/// Reduced state on `keep` (1-based, any order; result is in ascending order).
DensityMatrix partial_trace(const DensityMatrix &rho, std::span<const int> keep);
/// Raw matrix variant; `keep` order defines the output qubit order.
Matrix partial_trace(const Matrix &rho, int num_qubits, std::span<const int> keep);

DensityMatrix to_density(const BlochVector &v);
BlochVector to_bloch(const DensityMatrix &rho);
BlochVector to_bloch(const Matrix &rho);

double trace_norm(const Matrix &m);
/// 1/2 ||rho - sigma||_1.
double trace_distance(const Matrix &rho, const Matrix &sigma);
/// Trace-norm distance between Choi matrices; throws DimensionMismatch.
double choi_distance(const ChoiMatrix &a, const ChoiMatrix &b);
/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const StateVector &a, const StateVector &b);

ChoiMatrix choi_of_unitary(const Matrix &u);
/// Choi matrix of the linear map |i> -> images[i], where each image lives on
/// `num_out_qubits` qubits. Output qubits not listed in `keep` are traced out;
/// `keep` order defines the output factor order.
ChoiMatrix choi_from_images(const std::vector<Vector> &images, int num_out_qubits, std::span<const int> keep);
ChoiMatrix choi_of_kraus(std::span<const Matrix> kraus, int n_in, int n_out);
bool is_unitary(const Matrix &u, double tol = kDefaultTol);
bool is_hermitian(const Matrix &m, double tol = kDefaultTol);
double min_eigenvalue(const Matrix &hermitian);

// State-vector kernels over an n-qubit register.

/// Applies `op` (2^k x 2^k, first target most significant) to `targets`.
void apply_operator(Vector &state, int num_qubits, std::span<const int> targets, const Matrix &op);
/// Contracts `qubits` with <bra| and leaves them in |0...0>.
void project_qubits(Vector &state, int num_qubits, std::span<const int> qubits, const Vector &bra_ket);
/// Amplitudes over `keep` (in the given order) with all other qubits at |0>.
Vector extract_qubits(const Vector &state, int num_qubits, std::span<const int> keep);
/// Places `sub` on `positions` (given order) of an n-qubit register with all
/// other qubits at |0>.
Vector embed_qubits(const Vector &sub, int num_qubits, std::span<const int> positions);
/// Full 2^n x 2^n matrix of `op` acting on `targets`.
Matrix embed_operator(const Matrix &op, int num_qubits, std::span<const int> targets);
/// Permutes qubit factors: output qubit i carries input qubit order[i].
Matrix permute_qubits(const Matrix &rho, int num_qubits, std::span<const int> order);

StateVector random_state(int num_qubits, std::mt19937_64 &rng);
Matrix random_unitary(int num_qubits, std::mt19937_64 &rng);

namespace gates {
Matrix identity(int num_qubits = 1);
Matrix x();
Matrix y();
Matrix z();
Matrix h();
Matrix s();
Matrix sdg();
/// C = HSH = (e^{i pi/4} I + e^{-i pi/4} X)/sqrt 2.
Matrix c();
Matrix cdg();
/// J(theta) = 1/sqrt2 [[1, e^{i theta}], [1, -e^{i theta}]].
Matrix j(double theta);
Matrix phase(double theta);
Matrix cz();
/// Control on the first qubit.
Matrix cx();
Matrix swap();
}  // namespace gates

/// Bell state |beta_xy> = (|0y> + (-1)^x |1 not-y>)/sqrt2 for index 2x+y.
Vector bell_state(int index);

}  // namespace ctcmbqc
