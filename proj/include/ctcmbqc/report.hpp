#pragma once

// JSON and text renderings of engine results. JSON keys keep insertion order
// and every float is rounded to 12 significant digits, so identical inputs
// give byte-identical output.

#include <string>
#include <vector>

#include <json.hpp>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/ctc.hpp"
#include "ctcmbqc/graphstate.hpp"
#include "ctcmbqc/pattern.hpp"

namespace ctcmbqc {

using Json = nlohmann::ordered_json;

/// x rounded to 12 significant digits; -0 becomes 0.
double round12(double x);
/// "%.12g".
std::string format12(double x);

Json bloch_json(const BlochVector &b);
/// Amplitudes as [re, im] pairs.
Json amplitudes_json(const Vector &v);
Json matrix_json(const Matrix &m);
/// Coefficients c_a of rho = sum_a c_a P_a / 2^k, identity first.
Json pauli_coefficients_json(const Matrix &rho);

Json to_json(const BranchSet &bs);
Json to_json(const BssResult &r);
Json to_json(const DeutschSolution &s);
Json to_json(const ConflictReport &r);
Json to_json(const CtcSimulation &s);
/// Ordered list of {"op": "LC", "vertex": 5} entries.
Json to_json(const std::vector<RewriteStep> &log);

/// Two-space indented dump with a trailing newline.
std::string dump_json(const Json &j);

/// Left-aligned columns separated by two spaces.
class TextTable {
   public:
    explicit TextTable(std::vector<std::string> headers);
    void add_row(std::vector<std::string> cells);
    std::string render() const;

   private:
    std::vector<std::string> headers_;
    std::vector<std::vector<std::string>> rows_;
};

std::string to_text(const BranchSet &bs);
std::string to_text(const BssResult &r);
std::string to_text(const DeutschSolution &s);
std::string to_text(const ConflictReport &r);
std::string to_text(const CtcSimulation &s);

}  // namespace ctcmbqc
