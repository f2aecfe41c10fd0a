#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gpress/qmath.h"

namespace gpress {

class Rng;

/// Random partition of the count range {0..l} into m half-open bins [b_{j-1}, b_j).
///
/// boundaries = b_0 .. b_m with b_0 = 0, b_m = l + 1, nondecreasing. Interior boundaries
/// may coincide, in which case the bins between them are empty.
struct BinPartition {
    std::int64_t block_length = 0;
    std::vector<std::int64_t> boundaries;

    int bin_count() const { return static_cast<int>(boundaries.size()) - 1; }
    std::int64_t lower(int j) const { return boundaries.at(static_cast<std::size_t>(j - 1)); }
    std::int64_t upper(int j) const { return boundaries.at(static_cast<std::size_t>(j)); }
    /// 1-based index of the bin holding count k.
    int bin_of(std::int64_t k) const;
};

enum class FailureClass {
    Success,
    TooCloseBoundary,  // (i) an interior boundary lies within sqrt(l) ln l of l*alpha
    NoNearbyBoundary,  // (ii) no boundary within l^(1-s) ln l on one side of l*alpha
    WrongBin,          // (iii) the measured bin does not contain floor(l*alpha)
};

std::string_view to_string(FailureClass c);

struct GentleConfig {
    std::int64_t block_length = 0;
    double exponent_s = 0;
    std::int64_t bin_count = 1;

    /// m = floor(l^s), at least 1. Throws unless 0 < s < 1/2 and l >= 1.
    static GentleConfig from_exponent(std::int64_t l, double s);
    void validate() const;
};

struct GentleOutcome {
    int bin_index = 0;         // j in 1..m
    std::int64_t bin_lo = 0;   // b_{j-1}
    std::int64_t bin_hi = 0;   // b_j (exclusive)
    double alpha_estimate = 0;
    double bin_probability = 0;
    /// 1 - bin_probability, evaluated from the two binomial tails so it stays accurate
    /// when it is far below machine epsilon.
    double miss_probability = 0;
    bool contains_truth = false;  // bin holds floor(l*alpha)
    FailureClass failure_class = FailureClass::Success;
};

/// Interior boundaries drawn i.i.d. uniform on {0..l}, sorted; endpoints 0 and l+1.
BinPartition draw_bins(std::int64_t l, std::int64_t m, Rng &rng);

/// Binomial(l, alpha) probabilities for k = 0..l, evaluated in log space.
std::vector<double> count_pmf(double alpha, std::int64_t l);

/// Explicit collective counting operators M_0..M_l on (C^d)^{otimes l}: for every bit
/// string x, the tensor product of |phi><phi| (x_i = 1) and I - |phi><phi| (x_i = 0),
/// summed into M_{|x|}. Cost grows as 2^l d^{2l}; l is capped at 8.
std::vector<Matrix> collective_operators(const PureState &phi, int l);

/// rho^{otimes l} as an explicit matrix.
Matrix tensor_power(const Matrix &rho, int l);

/// Tr[M_k rho^{otimes l}] for k = 0..l by explicit tensor-product enumeration (l <= 8).
std::vector<double> brute_force_collective(const DensityMatrix &rho, const PureState &phi, int l);

/// Sum of pmf over the counts of bin j.
double bin_probability(std::span<const double> pmf, const BinPartition &bins, int j);

struct BinMass {
    double mass = 0;  // P(k in bin)
    double miss = 0;  // P(k outside bin)
};

/// Binomial(l, alpha) mass of counts [lo, hi) from the binomial CDF.
BinMass binomial_interval_mass(double alpha, std::int64_t l, std::int64_t lo, std::int64_t hi);

/// Exact probabilities of every bin under Binomial(l, alpha).
std::vector<double> bin_probabilities(double alpha, const BinPartition &bins);

/// Samples the bin index by inverse CDF over the exact binomial bin probabilities.
int sample_bin(double alpha, const BinPartition &bins, Rng &rng);

/// First triggered failure cause in the order (i), (ii), (iii), else Success.
///
/// Hazard (i) uses interior boundaries with a strict distance test |b - l alpha| <
/// sqrt(l) ln l. Cause (ii) asks for a boundary (endpoints included) in both
/// [l alpha - r, l alpha] and [l alpha, l alpha + r], r = l^(1-s) ln l. With no interior
/// boundaries only (iii) is tested.
FailureClass classify_failure(double alpha, const BinPartition &bins, int j, double exponent_s);

/// Bin midpoint / l, clipped to [0, 1].
double bin_midpoint_estimate(const BinPartition &bins, int j);

/// Draws bins, samples the outcome, and classifies it.
GentleOutcome run_gentle_block(double alpha, const GentleConfig &cfg, Rng &rng);

/// Outcome for a fixed partition (no bin draw).
GentleOutcome measure_with_bins(double alpha, const BinPartition &bins, double exponent_s, Rng &rng);

/// sqrt(bin_prob): overlap of a purification with its renormalized projection.
double entanglement_fidelity(double bin_prob);

/// 1 - sqrt(1 - miss) without cancellation.
double fidelity_deficit(double miss_probability);

}  // namespace gpress
