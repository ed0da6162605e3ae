#pragma once

// Pauli words and single-qubit Cliffords tracked modulo global phase.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctcmbqc/qmath.hpp"

namespace ctcmbqc {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);
Matrix pauli_matrix(Pauli p);

/// a*b = i^phase * result.
std::pair<int, Pauli> pauli_product(Pauli a, Pauli b);

/// Tensor product of single-qubit Paulis with an i^k phase. Identity factors
/// are never stored.
class PauliString {
   public:
    PauliString() = default;
    PauliString(std::map<int, Pauli> ops, int phase = 0);

    /// Accepts "X1 Z2 Z3", "X1Z2Z3" or "-Y1Y2".
    static PauliString parse(const std::string &text);
    static PauliString single(int qubit, Pauli p);

    const std::map<int, Pauli> &ops() const noexcept { return ops_; }
    /// Power of i multiplying the word.
    int phase() const noexcept { return phase_; }
    Pauli at(int qubit) const;
    bool empty() const noexcept { return ops_.empty(); }
    std::size_t weight() const noexcept { return ops_.size(); }
    std::vector<int> support() const;

    PauliString operator*(const PauliString &rhs) const;
    bool commutes_with(const PauliString &rhs) const;
    /// Same word and same phase.
    bool operator==(const PauliString &rhs) const = default;

    /// Full matrix on qubits 1..num_qubits, phase included.
    Matrix matrix(int num_qubits) const;
    /// Phase followed by the factors in qubit order, e.g. "-X1Z3".
    std::string to_string() const;

   private:
    std::map<int, Pauli> ops_;
    int phase_ = 0;
};

/// Single-qubit Clifford modulo phase, stored by its conjugation action on X
/// and Z: U X U^dagger = x_sign * x_image and likewise for Z. The 2x2 matrix
/// is carried along for state-level checks.
class LocalClifford {
   public:
    LocalClifford();

    static LocalClifford from_name(const std::string &name);
    static LocalClifford s();
    static LocalClifford sdg();
    static LocalClifford c();
    static LocalClifford cdg();
    static LocalClifford z();
    static LocalClifford x();
    static LocalClifford h();

    /// `next` applied after this one.
    LocalClifford then(const LocalClifford &next) const;
    LocalClifford inverse() const;

    /// U P U^dagger as (sign, Pauli).
    std::pair<int, Pauli> conjugate(Pauli p) const;
    bool is_identity() const;
    /// Diagonal up to phase, i.e. Z is mapped to +Z.
    bool is_diagonal() const;
    const Matrix &matrix() const noexcept { return matrix_; }
    /// Generator names in application order, "I" when trivial.
    const std::string &word() const noexcept { return word_; }

    bool same_action(const LocalClifford &other) const;

   private:
    LocalClifford(Pauli xi, int xs, Pauli zi, int zs, Matrix m, std::string word);

    Pauli x_image_ = Pauli::X;
    int x_sign_ = 1;
    Pauli z_image_ = Pauli::Z;
    int z_sign_ = 1;
    Matrix matrix_;
    std::string word_;
};

/// Conjugates every factor of `word` by the Clifford attached to its qubit.
PauliString conjugate(const PauliString &word, const std::map<int, LocalClifford> &cliffords);

}  // namespace ctcmbqc
