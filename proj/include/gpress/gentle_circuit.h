#pragma once

#include <cstdint>
#include <vector>

#include "gpress/gentle.h"
#include "gpress/qmath.h"

namespace gpress {

class Rng;

/// Joint state of n qubit copies, held as a purification
///   |Phi> = sum_x branches[x] (x) |x>_R
/// over a reference system R that the circuits never touch. Each branch is an
/// unnormalized 2^n vector with copy 0 as the most significant tensor factor.
struct SmallSimState {
    int copies = 0;
    std::vector<Vector> branches;

    /// Purification of rho^{otimes n} built from the single-copy eigendecomposition.
    static SmallSimState product(const DensityMatrix &rho, int n);
    /// A pure joint state (single branch).
    static SmallSimState pure(const Vector &psi, int n);

    /// Reduced state on the n copies: sum_x |branch_x><branch_x|.
    Matrix reduced_state() const;
    double norm_squared() const;
};

/// Maximum copies for the circuit backend.
inline constexpr int kCircuitCopyCap = 12;

/// Outcome of one run of the gentle-measurement circuit.
struct CircuitRun {
    int bin_index = 0;
    double probability = 0;        // Tr[M'_j rho^{otimes n}] from the simulated amplitudes
    SmallSimState post;            // normalized post-measurement purification
    double ancilla_residual = 0;   // norm of amplitude left outside |0>_count |0>_bin
    double purified_overlap = 0;   // Re <Phi|Phi'>
    std::int64_t gate_count = 0;
};

/// Born distribution of the count register after the controlled-increment stage
/// (the plain counting measurement).
std::vector<double> counting_circuit_distribution(const SmallSimState &state, const PureState &phi);

/// Born distribution of the bin register after count and BIN.
std::vector<double> gentle_circuit_distribution(const SmallSimState &state, const PureState &phi,
                                                const BinPartition &bins);

/// Count, BIN, project onto bin j, un-BIN, un-count.
CircuitRun run_gentle_circuit_for_bin(const SmallSimState &state, const PureState &phi,
                                      const BinPartition &bins, int j);

/// Samples j from the simulated bin-register distribution, then runs the conditional
/// circuit for that outcome.
CircuitRun simulate_gentle_circuit(const SmallSimState &state, const PureState &phi,
                                   const BinPartition &bins, Rng &rng);

}  // namespace gpress
