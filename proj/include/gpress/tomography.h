#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "gpress/gentle.h"
#include "gpress/qmath.h"

namespace gpress {

class Rng;

/// Raised when no PSD unit-trace matrix satisfying the constraints is found.
class InfeasibleError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

struct Block {
    int basis_index = 0;    // k in 1..d^2-1
    int eigen_index = 0;    // i in 1..d
    std::int64_t first_copy = 0;
    std::int64_t length = 0;
    PureState vector;       // |v_i^(k)>
};

/// d(d^2 - 1) disjoint blocks of l = floor(n / (d(d^2 - 1))) copies, ordered by (k, i).
/// Copies past l d(d^2 - 1) are left to the compression step.
struct BlockSchedule {
    std::int64_t n = 0;
    int d = 0;
    std::int64_t block_length = 0;
    std::vector<Block> blocks;
};

/// lo <= <phi|rho|phi> <= hi, in frequency units.
struct BinConstraint {
    double lo = 0;
    double hi = 1;
    PureState phi;
};

/// Per-block outcomes before any estimation.
struct BlockMeasurements {
    std::vector<GentleOutcome> outcomes;
    std::vector<BinConstraint> constraints;
    bool declared_success = false;   // every block classified Success (ground truth)
    bool all_contain_truth = false;  // no block landed in a bin excluding l*alpha
    double epsilon = 0;              // max over constraints of hi - lo
    double fidelity_proxy = 1;       // product of per-block sqrt(bin probability)
    double fidelity_deficit = 0;     // 1 - fidelity_proxy, computed from miss probabilities
};

struct TomographyResult {
    DensityMatrix estimate = DensityMatrix::maximally_mixed(2);
    BlockMeasurements measurements;
    bool declared_success = false;
    /// What an encoder without ground truth can tell: the solver found a feasible point.
    bool encoder_observed_success = true;
    double epsilon = 0;
    double trace_norm_bound = 0;
};

struct FeasibilityOptions {
    int max_cycles = 100000;
    double tolerance = 1e-9;
};

BlockSchedule block_schedule(std::int64_t n, int d, const TracelessBasis &basis);

/// Runs one gentle measurement per block with alpha = <v|rho_true|v>. Block b uses an
/// independent generator seeded by derive_seed(master draw, 0, b).
BlockMeasurements measure_blocks(const DensityMatrix &rho_true, const BlockSchedule &schedule,
                                 double exponent_s, Rng &rng);

/// Gentle tomography followed by feasibility estimation. Throws InfeasibleError when the
/// solver finds no consistent state (possible only after a failed block).
TomographyResult run_gentle_tomography(const DensityMatrix &rho_true, std::int64_t n, double s,
                                       Rng &rng);

/// Finds a PSD unit-trace matrix meeting every constraint by Dykstra's alternating
/// projections, started from I/d. The returned matrix passes a post-hoc certificate:
/// min eigenvalue >= -1e-9, |tr - 1| <= 1e-9, every constraint met within 1e-7.
DensityMatrix feasibility_solve(const std::vector<BinConstraint> &constraints, int d,
                                const FeasibilityOptions &options = {});

/// Largest constraint violation of a matrix.
double max_constraint_violation(const Matrix &m, const std::vector<BinConstraint> &constraints);

/// d^{5/2} epsilon.
double trace_norm_error_bound(double epsilon, int d);

/// {"bin_index", "bin_lo", "bin_hi", "alpha_estimate", "bin_probability",
///  "miss_probability", "contains_truth", "failure_class"}
nlohmann::json outcome_to_json(const GentleOutcome &o);

/// Estimate as {"d", "bloch"}, constraints as {"lo", "hi", "phi"} with phi in [re, im]
/// pairs, per-block outcomes, and the scalar summaries.
nlohmann::json tomography_to_json(const TomographyResult &r);

}  // namespace gpress
