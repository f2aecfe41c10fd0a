#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpress/codec.h"
#include "gpress/qmath.h"

namespace gpress {

class Rng;

struct OverflowEstimate {
    double probability = 0;
    double standard_error = 0;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    bool importance_sampled = false;
    double tilt = 0;  // theta of the sampling distribution q_i e^(theta l_i) / Z
    /// Fewer than 10 hits: `probability` is unreliable and only `upper_bound` should be
    /// quoted.
    bool upper_bound_only = false;
    double upper_bound = 1;
};

/// Pr[payload bits >= n R] for n symbols drawn i.i.d. from diagonal_distribution(rho, est)
/// and coded with est's model. Every trial runs the real encoder.
///
/// Raw Monte Carlo is used when the Chernoff estimate exp(-n I(R)) exceeds 1e-3;
/// otherwise symbols are drawn from the exponentially tilted law whose mean code length is
/// R, and each hit is reweighted by Z(theta)^n exp(-theta sum l). Returns probability 0
/// without sampling when R exceeds ceil(log2 d), since the payload never exceeds
/// n ceil(log2 d) bits.
OverflowEstimate overflow_probability_mc(const DensityMatrix &rho, const RegularizedEstimate &est,
                                         std::uint64_t n, double rate, std::uint64_t trials, Rng &rng);

/// Cramer rate function of the per-symbol code length l_i = -log2 p_i under q, in bits:
/// sup_{theta >= 0} [theta R - ln E_q e^(theta l)] / ln 2. Zero for R at or below the mean,
/// +infinity above the largest code length with positive probability.
double code_length_rate_function(std::span<const double> q, std::span<const double> model,
                                 double rate);

/// (1 / (d(d^2-1))) sum_k S(M_k(sigma) || M_k(rho)) in bits, where M_k measures in the
/// eigenbasis of basis element k.
double averaged_measured_relative_entropy(const Matrix &sigma, const DensityMatrix &rho,
                                          const TracelessBasis &basis);

struct ExponentResult {
    double value = 0;
    bool certified = false;
    std::vector<double> minimizer;  // Gell-Mann coefficients of the optimal sigma
};

/// inf over sigma with S(sigma) >= R of the averaged measured relative entropy.
///
/// d = 2 is certified: the objective is convex and, when S(rho) < R, its minimum over the
/// ball |c| <= c_R sits on the boundary sphere, which is searched by a coarse angular grid
/// followed by Nelder-Mead. Larger d runs multi-start Nelder-Mead with a retraction that
/// mixes toward I/d until S(sigma) >= R, and is flagged non-certified.
ExponentResult overflow_exponent(const DensityMatrix &rho, double rate, const TracelessBasis &basis);

/// overflow_exponent(...).value.
double overflow_exponent_analytic(const DensityMatrix &rho, double rate, const TracelessBasis &basis);

}  // namespace gpress
