#include <doctest.h>

#include <cmath>
#include <random>

#include "ctcmbqc/error.hpp"
#include "ctcmbqc/qmath.hpp"
#include "support.hpp"

using namespace ctcmbqc;

namespace {

// Hand-written 4x4 Choi of rho -> U rho U^dagger: C = sum_ij |i><j| (x) U|i><j|U^dagger.
Matrix explicit_choi(const Matrix &u) {
    Matrix c = Matrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Matrix block = u.col(i) * u.col(j).adjoint();
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) c(2 * i + a, 2 * j + b) = block(a, b);
            }
        }
    }
    return c;
}

}  // namespace

TEST_SUITE("qmath") {

TEST_CASE("plus-plus, CZ then H on qubit 2 gives beta_00") {
    const double r = 1 / std::sqrt(2.0);
    Matrix cz = Matrix::Identity(4, 4);
    cz(3, 3) = -1;
    Matrix h2 = Matrix::Zero(4, 4);
    h2 << r, r, 0, 0, r, -r, 0, 0, 0, 0, r, r, 0, 0, r, -r;
    Vector pp = Vector::Constant(4, 0.5);
    Vector got = h2 * cz * pp;
    Vector beta00(4);
    beta00 << r, 0, 0, r;
    CHECK((got - beta00).norm() < 1e-12);
    CHECK((got - bell_state(0)).norm() < 1e-12);

    Vector via_kernels = tensor(StateVector::plus(), StateVector::plus()).amplitudes();
    const int both[2] = {1, 2}, second[1] = {2};
    apply_operator(via_kernels, 2, both, gates::cz());
    apply_operator(via_kernels, 2, second, gates::h());
    CHECK((via_kernels - beta00).norm() < 1e-12);
}

TEST_CASE("Bloch (cos t, sin t, 0) is |+_t><+_t|") {
    for (double t : {0.0, 0.3, 1.7, -2.2}) {
        Matrix expected(2, 2);
        expected << 0.5, 0.5 * std::exp(Complex(0, -t)), 0.5 * std::exp(Complex(0, t)), 0.5;
        DensityMatrix rho = to_density({std::cos(t), std::sin(t), 0});
        CHECK((rho.matrix() - expected).norm() < 1e-12);
        CHECK((rho.matrix() - DensityMatrix::pure(StateVector::plus_theta(t)).matrix()).norm() < 1e-12);
    }
}

TEST_CASE("Choi of J gates matches the explicit construction and separates angles") {
    ChoiMatrix a = choi_of_unitary(gates::j(0.4));
    ChoiMatrix b = choi_of_unitary(gates::j(0.9));
    CHECK((a.matrix() - explicit_choi(gates::j(0.4))).norm() < 1e-12);
    CHECK(choi_distance(a, a) < 1e-12);
    CHECK(choi_distance(a, b) > 0.1);
    CHECK(std::abs(choi_distance(a, b) - trace_norm(explicit_choi(gates::j(0.4)) - explicit_choi(gates::j(0.9)))) < 1e-10);
}

TEST_CASE("J(0) is the Hadamard and J gates are unitary") {
    CHECK((gates::j(0) - gates::h()).norm() < 1e-12);
    CHECK(is_unitary(gates::j(1.234)));
    CHECK((gates::c() - gates::h() * gates::s() * gates::h()).norm() < 1e-12);
}

TEST_CASE("qubit 1 is the most significant bit") {
    StateVector s = tensor(StateVector::basis(1, 1), StateVector::basis(1, 0));
    CHECK(std::abs(s[2] - 1.0) < 1e-12);
    Vector v = StateVector::basis(3, 0).amplitudes();
    const int q1[1] = {1};
    apply_operator(v, 3, q1, gates::x());
    CHECK(std::abs(v(4) - 1.0) < 1e-12);
}

TEST_CASE("density matrix construction rejects non-physical input") {
    Matrix m(2, 2);
    m << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{m}, Error);
    Matrix nh(2, 2);
    nh << 0.5, 0.2, 0.1, 0.5;
    CHECK_THROWS_AS(DensityMatrix{nh}, Error);
    CHECK_THROWS_AS(StateVector(Vector::Zero(2)).normalized(), Error);
}

TEST_CASE("tensor rejects mixed kinds") {
    QuantumState a = StateVector::plus();
    QuantumState b = DensityMatrix::maximally_mixed(1);
    try {
        (void)tensor(a, b);
        FAIL("expected KindMismatch");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::KindMismatch);
    }
}

TEST_CASE("choi_distance rejects different shapes") {
    try {
        (void)choi_distance(choi_of_unitary(gates::h()), choi_of_unitary(gates::cz()));
        FAIL("expected DimensionMismatch");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("partial trace over everything is the trace, and traces compose") {
    for (int seed : testing::kSeeds) {
        std::mt19937_64 rng(seed);
        DensityMatrix rho = DensityMatrix::pure(random_state(3, rng));
        CHECK(std::abs(partial_trace(rho.matrix(), 3, {}).trace().real() - rho.trace()) < 1e-12);
        const int keep12[2] = {1, 2}, keep1[1] = {1};
        Matrix two_step = partial_trace(partial_trace(rho.matrix(), 3, keep12), 2, keep1);
        CHECK((two_step - partial_trace(rho.matrix(), 3, keep1)).norm() < 1e-12);
    }
}

TEST_CASE("partial trace of a product state returns the factor") {
    std::mt19937_64 rng(5);
    StateVector a = random_state(1, rng), b = random_state(2, rng);
    DensityMatrix ab = DensityMatrix::pure(tensor(a, b));
    const int keep[2] = {2, 3};
    CHECK((partial_trace(ab, keep).matrix() - DensityMatrix::pure(b).matrix()).norm() < 1e-12);
}

TEST_CASE("Bloch round trip is an involution on the ball") {
    for (int seed : testing::kSeeds) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int i = 0; i < 50; ++i) {
            BlochVector v{u(rng), u(rng), u(rng)};
            if (v.norm() > 1) continue;
            BlochVector w = to_bloch(to_density(v));
            CHECK(std::abs(w.x - v.x) < 1e-12);
            CHECK(std::abs(w.y - v.y) < 1e-12);
            CHECK(std::abs(w.z - v.z) < 1e-12);
        }
    }
}

TEST_CASE("tensor is associative") {
    std::mt19937_64 rng(3);
    StateVector a = random_state(1, rng), b = random_state(1, rng), c = random_state(2, rng);
    CHECK((tensor(tensor(a, b), c).amplitudes() - tensor(a, tensor(b, c)).amplitudes()).norm() < 1e-12);
}

TEST_CASE("permute_qubits swaps factors") {
    DensityMatrix a = DensityMatrix::pure(StateVector::basis(1, 1));
    DensityMatrix b = DensityMatrix::maximally_mixed(1);
    const int order[2] = {2, 1};
    Matrix swapped = permute_qubits(tensor(a, b).matrix(), 2, order);
    CHECK((swapped - tensor(b, a).matrix()).norm() < 1e-12);
}

TEST_CASE("Choi of Kraus and images agree with the unitary Choi") {
    Matrix u = gates::j(0.3);
    std::vector<Matrix> k{u};
    CHECK(choi_distance(choi_of_kraus(k, 1, 1), choi_of_unitary(u)) < 1e-12);
    std::vector<Vector> images{u.col(0), u.col(1)};
    const int keep[1] = {1};
    CHECK(choi_distance(choi_from_images(images, 1, keep), choi_of_unitary(u)) < 1e-12);
    ChoiMatrix c = choi_of_unitary(u);
    CHECK((c.input_marginal() - Matrix::Identity(2, 2)).norm() < 1e-12);
    Matrix rho = to_density({0.1, 0.2, 0.3}).matrix();
    CHECK((c.apply(rho) - u * rho * u.adjoint()).norm() < 1e-12);
}

TEST_CASE("renormalized rescales to the trace-preserving trace") {
    ChoiMatrix c = choi_of_unitary(gates::h()).scaled(0.25);
    CHECK(std::abs(c.trace() - 0.5) < 1e-12);
    CHECK(std::abs(c.renormalized().trace() - 2.0) < 1e-12);
}

}  // TEST_SUITE
