#include "ctcmbqc/pauli.hpp"

#include <cctype>

#include <unsupported/Eigen/KroneckerProduct>

#include "ctcmbqc/error.hpp"

namespace ctcmbqc {

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: throw Error(ErrorCode::Parse, std::string("unknown Pauli letter '") + c + "'");
    }
}

Matrix pauli_matrix(Pauli p) {
    switch (p) {
        case Pauli::I: return gates::identity();
        case Pauli::X: return gates::x();
        case Pauli::Y: return gates::y();
        case Pauli::Z: return gates::z();
    }
    return gates::identity();
}

std::pair<int, Pauli> pauli_product(Pauli a, Pauli b) {
    if (a == Pauli::I) return {0, b};
    if (b == Pauli::I) return {0, a};
    if (a == b) return {0, Pauli::I};
    auto ia = static_cast<int>(a);
    auto ib = static_cast<int>(b);
    // XY = iZ, YZ = iX, ZX = iY; reversed order gives -i.
    int third = 6 - ia - ib;
    bool cyclic = (ib - ia + 3) % 3 == 1;
    return {cyclic ? 1 : 3, static_cast<Pauli>(third)};
}

PauliString::PauliString(std::map<int, Pauli> ops, int phase) : phase_(((phase % 4) + 4) % 4) {
    for (auto [q, p] : ops) {
        if (q < 1) throw Error(ErrorCode::Validation, "Pauli qubit index must be positive");
        if (p != Pauli::I) ops_[q] = p;
    }
}

PauliString PauliString::single(int qubit, Pauli p) { return PauliString({{qubit, p}}); }

PauliString PauliString::parse(const std::string &text) {
    std::map<int, Pauli> ops;
    int phase = 0;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '*')) ++i;
    };
    skip();
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        if (text[i] == '-') phase = 2;
        ++i;
        skip();
    }
    if (i < text.size() && text[i] == 'i') {
        phase += 1;
        ++i;
        skip();
    }
    while (i < text.size()) {
        Pauli p = pauli_from_char(text[i]);
        ++i;
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) throw Error(ErrorCode::Parse, "Pauli letter without qubit index in '" + text + "'");
        int q = std::stoi(text.substr(start, i - start));
        if (ops.count(q)) throw Error(ErrorCode::Parse, "qubit " + std::to_string(q) + " repeated in '" + text + "'");
        ops[q] = p;
        skip();
    }
    if (ops.empty() && phase == 0) throw Error(ErrorCode::Parse, "empty Pauli word");
    return PauliString(std::move(ops), phase);
}

Pauli PauliString::at(int qubit) const {
    auto it = ops_.find(qubit);
    return it == ops_.end() ? Pauli::I : it->second;
}

std::vector<int> PauliString::support() const {
    std::vector<int> out;
    for (auto &[q, p] : ops_) out.push_back(q);
    return out;
}

PauliString PauliString::operator*(const PauliString &rhs) const {
    std::map<int, Pauli> ops = ops_;
    int phase = phase_ + rhs.phase_;
    for (auto [q, p] : rhs.ops_) {
        auto [k, r] = pauli_product(at(q), p);
        phase += k;
        ops[q] = r;
    }
    return PauliString(std::move(ops), phase);
}

bool PauliString::commutes_with(const PauliString &rhs) const {
    int anti = 0;
    for (auto [q, p] : ops_) {
        Pauli o = rhs.at(q);
        if (o != Pauli::I && o != p) ++anti;
    }
    return anti % 2 == 0;
}

Matrix PauliString::matrix(int num_qubits) const {
    Matrix m = Matrix::Identity(1, 1);
    for (int q = 1; q <= num_qubits; ++q) {
        Matrix f = pauli_matrix(at(q));
        m = Eigen::kroneckerProduct(m, f).eval();
    }
    static const Complex kPhase[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
    return kPhase[phase_] * m;
}

std::string PauliString::to_string() const {
    static const char *kPrefix[4] = {"", "i", "-", "-i"};
    std::string out = kPrefix[phase_];
    for (auto [q, p] : ops_) out += pauli_char(p) + std::to_string(q);
    if (ops_.empty()) out += "I";
    return out;
}

// ---------------------------------------------------------------------------
// LocalClifford

LocalClifford::LocalClifford() : matrix_(gates::identity()), word_("I") {}

LocalClifford::LocalClifford(Pauli xi, int xs, Pauli zi, int zs, Matrix m, std::string word)
    : x_image_(xi), x_sign_(xs), z_image_(zi), z_sign_(zs), matrix_(std::move(m)), word_(std::move(word)) {}

LocalClifford LocalClifford::s() { return {Pauli::Y, 1, Pauli::Z, 1, gates::s(), "S"}; }
LocalClifford LocalClifford::sdg() { return {Pauli::Y, -1, Pauli::Z, 1, gates::sdg(), "Sdag"}; }
LocalClifford LocalClifford::c() { return {Pauli::X, 1, Pauli::Y, -1, gates::c(), "C"}; }
LocalClifford LocalClifford::cdg() { return {Pauli::X, 1, Pauli::Y, 1, gates::cdg(), "Cdag"}; }
LocalClifford LocalClifford::z() { return {Pauli::X, -1, Pauli::Z, 1, gates::z(), "Z"}; }
LocalClifford LocalClifford::x() { return {Pauli::X, 1, Pauli::Z, -1, gates::x(), "X"}; }
LocalClifford LocalClifford::h() { return {Pauli::Z, 1, Pauli::X, 1, gates::h(), "H"}; }

LocalClifford LocalClifford::from_name(const std::string &name) {
    if (name == "I") return {};
    if (name == "S") return s();
    if (name == "Sdag") return sdg();
    if (name == "C") return c();
    if (name == "Cdag") return cdg();
    if (name == "Z") return z();
    if (name == "X") return x();
    if (name == "H") return h();
    throw Error(ErrorCode::Parse, "unknown local Clifford '" + name + "'");
}

std::pair<int, Pauli> LocalClifford::conjugate(Pauli p) const {
    switch (p) {
        case Pauli::I: return {1, Pauli::I};
        case Pauli::X: return {x_sign_, x_image_};
        case Pauli::Z: return {z_sign_, z_image_};
        case Pauli::Y: {
            // Y = i X Z, so U Y U^dagger = i (U X U^dagger)(U Z U^dagger).
            auto [k, r] = pauli_product(x_image_, z_image_);
            int sign = x_sign_ * z_sign_;
            // i * i^k must be real: k is 1 or 3.
            int total = (1 + k) % 4;
            return {total == 0 ? sign : -sign, r};
        }
    }
    return {1, p};
}

LocalClifford LocalClifford::then(const LocalClifford &next) const {
    auto [xs, xi] = conjugate(Pauli::X);
    auto [zs, zi] = conjugate(Pauli::Z);
    auto [xs2, xi2] = next.conjugate(xi);
    auto [zs2, zi2] = next.conjugate(zi);
    LocalClifford out(xi2, xs * xs2, zi2, zs * zs2, next.matrix_ * matrix_, "");
    if (out.is_identity()) {
        out.word_ = "I";
    } else if (word_ == "I") {
        out.word_ = next.word_;
    } else if (next.word_ == "I") {
        out.word_ = word_;
    } else {
        out.word_ = word_ + "," + next.word_;
    }
    return out;
}

LocalClifford LocalClifford::inverse() const {
    // Find images of X and Z under U^dagger by inverting the action table.
    LocalClifford out;
    const Pauli all[3] = {Pauli::X, Pauli::Y, Pauli::Z};
    for (Pauli p : all) {
        auto [sign, img] = conjugate(p);
        if (img == Pauli::X) {
            out.x_image_ = p;
            out.x_sign_ = sign;
        } else if (img == Pauli::Z) {
            out.z_image_ = p;
            out.z_sign_ = sign;
        }
    }
    out.matrix_ = matrix_.adjoint();
    out.word_ = is_identity() ? "I" : "inv(" + word_ + ")";
    return out;
}

bool LocalClifford::is_identity() const {
    return x_image_ == Pauli::X && x_sign_ == 1 && z_image_ == Pauli::Z && z_sign_ == 1;
}

bool LocalClifford::is_diagonal() const { return z_image_ == Pauli::Z && z_sign_ == 1; }

bool LocalClifford::same_action(const LocalClifford &other) const {
    return x_image_ == other.x_image_ && x_sign_ == other.x_sign_ && z_image_ == other.z_image_ &&
           z_sign_ == other.z_sign_;
}

PauliString conjugate(const PauliString &word, const std::map<int, LocalClifford> &cliffords) {
    std::map<int, Pauli> ops;
    int phase = word.phase();
    for (auto [q, p] : word.ops()) {
        auto it = cliffords.find(q);
        if (it == cliffords.end()) {
            ops[q] = p;
            continue;
        }
        auto [sign, img] = it->second.conjugate(p);
        if (sign < 0) phase += 2;
        ops[q] = img;
    }
    return PauliString(std::move(ops), phase);
}

}  // namespace ctcmbqc
