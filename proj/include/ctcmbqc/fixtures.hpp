#pragma once

// Reference instances shared by the scenarios, the tests and the bindings.
// Angles are free parameters; the defaults are generic (no Clifford angles).

#include <utility>

#include "ctcmbqc/circuit.hpp"
#include "ctcmbqc/ctc.hpp"
#include "ctcmbqc/graphstate.hpp"
#include "ctcmbqc/pattern.hpp"

namespace ctcmbqc::fixtures {

inline constexpr double kTheta = 0.7;
inline constexpr double kTheta3 = 0.3;
inline constexpr double kTheta4 = 1.1;

/// N2 E12 M1^theta X2^{s1}: teleports J(-theta) from qubit 1 to qubit 2.
Pattern j_pattern(double theta = kTheta);

/// N2 E12 Z1^{s1} M1^theta: the same map with an anachronical correction.
Pattern j_pattern_anachronical(double theta = kTheta);

/// Measurement-based J(-theta): theta-basis measurement of qubit 1 and a
/// classically controlled X on qubit 2.
Circuit j_measured_circuit(double theta = kTheta);

/// psi on 1, |+> on 2, CTC slot 3: CZ(1,2) CZ(1,3) J(-theta)_1, with qubit 1
/// sent back after the J gate to re-enter as qubit 3 before the second CZ.
Circuit j_ctc_circuit(double theta = kTheta);

/// Four-qubit time-respecting pattern: input 3, outputs 1 and 2, measurements
/// of 3 then 4 with X/Z corrections.
Pattern four_qubit_pattern(double theta3 = kTheta3, double theta4 = kTheta4);

/// The same with qubit 4 also an input (no N4).
Pattern four_qubit_pattern_two_inputs(double theta3 = kTheta3, double theta4 = kTheta4);

/// V = J(-theta)_B CZ_BC on one CR qubit and one CTC qubit.
CtcSpec j_loop_spec(double theta = kTheta);

/// The same V with an extra |+> register wire entangled with the CR wire
/// before V by a CZ.
CtcSpec embedded_j_loop_spec(double theta = kTheta);

/// Five-vertex graph with edges 3-4, 3-5, 3-2, 5-1, 1-2; X measurements on 1
/// and 5, theta on 3; input 3, outputs 2 and 4.
std::pair<OpenGraph, MeasurementPlan> reduction_graph(double theta = kTheta);

/// Edges 1-2 and 1-3; every vertex an output.
OpenGraph star_graph();

}  // namespace ctcmbqc::fixtures
