#pragma once

// Seeded property checks shared by the unit tests and the acceptance binary.
// Each returns the worst violation found, so callers can print it.

#include <cstdint>
#include <string>

namespace properties {

struct Outcome {
    bool passed = true;
    /// Worst observed violation or a short failure note.
    std::string detail;
};

/// d(a,a) = 0, symmetry and triangle inequality on random channel triples.
Outcome choi_metric_axioms(std::uint64_t seed);

/// Local complementation on random open graphs: involution on edges, local
/// unitary decorations, state equality, vertex count preserved.
Outcome lc_involution(std::uint64_t seed);

/// Random verified stabilizers and signals on the fixture patterns (20 trials)
/// never change the execute map.
Outcome stabilizer_rewrite_invariance(std::uint64_t seed);

/// Time-respecting circuits and patterns: probabilities sum to 1 and equal the
/// branch norms; deterministic patterns have equiprobable branches.
Outcome branch_normalization(std::uint64_t seed);

}  // namespace properties
