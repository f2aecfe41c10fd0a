#include "gpress/gentle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/binomial.hpp>

#include "gpress/rng.h"

namespace gpress {

namespace {

constexpr int kBruteForceCap = 8;

void require_alpha(double alpha, const char *what) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument(std::string(what) + ": alpha must lie in [0, 1]");
    }
}

// P(X <= k) and P(X > k) for X ~ Binomial(l, alpha), with exact handling of the edges.
double lower_cdf(double alpha, std::int64_t l, std::int64_t k) {
    if (k < 0) return 0.0;
    if (k >= l) return 1.0;
    if (alpha <= 0.0) return 1.0;
    if (alpha >= 1.0) return 0.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(l), alpha);
    return boost::math::cdf(dist, static_cast<double>(k));
}

double upper_cdf(double alpha, std::int64_t l, std::int64_t k) {
    if (k < 0) return 1.0;
    if (k >= l) return 0.0;
    if (alpha <= 0.0) return 0.0;
    if (alpha >= 1.0) return 1.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(l), alpha);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k)));
}

std::int64_t truth_count(double alpha, std::int64_t l) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(alpha * l)), 0, l);
}

}  // namespace

std::string_view to_string(FailureClass c) {
    switch (c) {
        case FailureClass::Success: return "success";
        case FailureClass::TooCloseBoundary: return "too_close_boundary";
        case FailureClass::NoNearbyBoundary: return "no_nearby_boundary";
        case FailureClass::WrongBin: return "wrong_bin";
    }
    return "unknown";
}

int BinPartition::bin_of(std::int64_t k) const {
    if (k < 0 || k > block_length) {
        throw std::out_of_range("BinPartition::bin_of: count outside {0..l}");
    }
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), k);
    return static_cast<int>(it - boundaries.begin());
}

GentleConfig GentleConfig::from_exponent(std::int64_t l, double s) {
    GentleConfig cfg;
    cfg.block_length = l;
    cfg.exponent_s = s;
    if (l < 1) {
        throw std::invalid_argument("GentleConfig: block length must be positive");
    }
    // The small offset keeps exact integer powers (e.g. 10^4^(1/4)) from flooring down.
    cfg.bin_count = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(l), s) + 1e-9)));
    cfg.validate();
    return cfg;
}

void GentleConfig::validate() const {
    if (block_length < 1) {
        throw std::invalid_argument("GentleConfig: block length must be positive");
    }
    if (!(exponent_s > 0.0 && exponent_s < 0.5)) {
        throw std::invalid_argument("GentleConfig: exponent s must lie in (0, 1/2)");
    }
    if (bin_count < 1 || bin_count > block_length) {
        throw std::invalid_argument("GentleConfig: bin count must lie in [1, l]");
    }
}

BinPartition draw_bins(std::int64_t l, std::int64_t m, Rng &rng) {
    if (m < 1 || m > l) {
        throw std::invalid_argument("draw_bins: need 1 <= m <= l");
    }
    BinPartition bins;
    bins.block_length = l;
    bins.boundaries.reserve(static_cast<std::size_t>(m + 1));
    bins.boundaries.push_back(0);
    for (std::int64_t i = 1; i < m; ++i) {
        bins.boundaries.push_back(
            static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(l) + 1)));
    }
    std::sort(bins.boundaries.begin() + 1, bins.boundaries.end());
    bins.boundaries.push_back(l + 1);
    return bins;
}

std::vector<double> count_pmf(double alpha, std::int64_t l) {
    require_alpha(alpha, "count_pmf");
    if (l < 0) {
        throw std::invalid_argument("count_pmf: negative block length");
    }
    std::vector<double> pmf(static_cast<std::size_t>(l + 1), 0.0);
    if (alpha == 0.0) {
        pmf.front() = 1.0;
        return pmf;
    }
    if (alpha == 1.0) {
        pmf.back() = 1.0;
        return pmf;
    }
    const double la = std::log(alpha);
    const double lb = std::log1p(-alpha);
    const double lgl = std::lgamma(static_cast<double>(l) + 1);
    for (std::int64_t k = 0; k <= l; ++k) {
        double kk = static_cast<double>(k);
        double log_p = lgl - std::lgamma(kk + 1) - std::lgamma(static_cast<double>(l - k) + 1) +
                       kk * la + static_cast<double>(l - k) * lb;
        pmf[static_cast<std::size_t>(k)] = std::exp(log_p);
    }
    return pmf;
}

namespace {

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

Matrix tensor_power(const Matrix &rho, int l) {
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < l; ++i) {
        out = kron(out, rho);
    }
    return out;
}

std::vector<Matrix> collective_operators(const PureState &phi, int l) {
    if (l < 1 || l > kBruteForceCap) {
        throw std::invalid_argument("collective_operators: l must lie in [1, 8]");
    }
    const int d = phi.dim();
    const Matrix p = phi.projector();
    const Matrix q = Matrix::Identity(d, d) - p;
    const auto dim = static_cast<Eigen::Index>(std::pow(d, l));
    std::vector<Matrix> ops(static_cast<std::size_t>(l + 1), Matrix::Zero(dim, dim));
    // Copy 0 is the most significant tensor factor.
    for (std::uint32_t x = 0; x < (1u << l); ++x) {
        Matrix term = Matrix::Identity(1, 1);
        int weight = 0;
        for (int i = 0; i < l; ++i) {
            bool bit = (x >> (l - 1 - i)) & 1u;
            weight += bit;
            term = kron(term, bit ? p : q);
        }
        ops[static_cast<std::size_t>(weight)] += term;
    }
    return ops;
}

std::vector<double> brute_force_collective(const DensityMatrix &rho, const PureState &phi, int l) {
    if (rho.dim() != phi.dim()) {
        throw std::invalid_argument("brute_force_collective: dimension mismatch");
    }
    std::vector<Matrix> ops = collective_operators(phi, l);
    Matrix joint = tensor_power(rho.matrix(), l);
    std::vector<double> probs;
    probs.reserve(ops.size());
    for (const Matrix &m : ops) {
        probs.push_back(m.cwiseProduct(joint.transpose()).sum().real());
    }
    return probs;
}

double bin_probability(std::span<const double> pmf, const BinPartition &bins, int j) {
    if (j < 1 || j > bins.bin_count()) {
        throw std::out_of_range("bin_probability: bin index out of range");
    }
    if (static_cast<std::int64_t>(pmf.size()) != bins.block_length + 1) {
        throw std::invalid_argument("bin_probability: pmf length must be l + 1");
    }
    std::int64_t lo = bins.lower(j);
    std::int64_t hi = std::min(bins.upper(j), bins.block_length + 1);
    double total = 0;
    for (std::int64_t k = lo; k < hi; ++k) {
        total += pmf[static_cast<std::size_t>(k)];
    }
    return total;
}

BinMass binomial_interval_mass(double alpha, std::int64_t l, std::int64_t lo, std::int64_t hi) {
    require_alpha(alpha, "binomial_interval_mass");
    BinMass out;
    if (hi <= lo) {
        out.mass = 0;
        out.miss = 1;
        return out;
    }
    double below = lower_cdf(alpha, l, lo - 1);  // P(k < lo)
    double above = upper_cdf(alpha, l, hi - 1);  // P(k >= hi)
    out.miss = std::min(1.0, below + above);
    double mean = alpha * static_cast<double>(l);
    if (static_cast<double>(hi - 1) < mean) {
        out.mass = lower_cdf(alpha, l, hi - 1) - below;
    } else if (static_cast<double>(lo) > mean) {
        out.mass = upper_cdf(alpha, l, lo - 1) - above;
    } else {
        out.mass = 1.0 - out.miss;
    }
    out.mass = std::clamp(out.mass, 0.0, 1.0);
    return out;
}

std::vector<double> bin_probabilities(double alpha, const BinPartition &bins) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(bins.bin_count()));
    for (int j = 1; j <= bins.bin_count(); ++j) {
        probs.push_back(
            binomial_interval_mass(alpha, bins.block_length, bins.lower(j), bins.upper(j)).mass);
    }
    return probs;
}

int sample_bin(double alpha, const BinPartition &bins, Rng &rng) {
    require_alpha(alpha, "sample_bin");
    const double u = rng.uniform();
    // Smallest j with P(k <= b_j - 1) > u. Empty bins share their predecessor's CDF value
    // and are never selected.
    int lo = 1;
    int hi = bins.bin_count();
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (lower_cdf(alpha, bins.block_length, bins.upper(mid) - 1) > u) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

FailureClass classify_failure(double alpha, const BinPartition &bins, int j, double exponent_s) {
    const std::int64_t l = bins.block_length;
    const double ld = static_cast<double>(l);
    const double center = ld * alpha;
    const std::int64_t truth = truth_count(alpha, l);
    const bool contains = bins.lower(j) <= truth && truth < bins.upper(j);
    if (bins.bin_count() <= 1) {
        return contains ? FailureClass::Success : FailureClass::WrongBin;
    }

    const double log_l = std::log(ld);
    const double hazard = std::sqrt(ld) * log_l;
    for (std::size_t i = 1; i + 1 < bins.boundaries.size(); ++i) {
        if (std::abs(static_cast<double>(bins.boundaries[i]) - center) < hazard) {
            return FailureClass::TooCloseBoundary;
        }
    }

    const double reach = std::pow(ld, 1.0 - exponent_s) * log_l;
    bool left = false;
    bool right = false;
    for (std::int64_t b : bins.boundaries) {
        double x = static_cast<double>(b);
        left = left || (x >= center - reach && x <= center);
        right = right || (x >= center && x <= center + reach);
    }
    if (!left || !right) {
        return FailureClass::NoNearbyBoundary;
    }
    return contains ? FailureClass::Success : FailureClass::WrongBin;
}

double bin_midpoint_estimate(const BinPartition &bins, int j) {
    double mid = 0.5 * static_cast<double>(bins.lower(j) + bins.upper(j)) /
                 static_cast<double>(bins.block_length);
    return std::clamp(mid, 0.0, 1.0);
}

GentleOutcome measure_with_bins(double alpha, const BinPartition &bins, double exponent_s, Rng &rng) {
    require_alpha(alpha, "measure_with_bins");
    GentleOutcome out;
    out.bin_index = sample_bin(alpha, bins, rng);
    out.bin_lo = bins.lower(out.bin_index);
    out.bin_hi = bins.upper(out.bin_index);
    BinMass mass = binomial_interval_mass(alpha, bins.block_length, out.bin_lo, out.bin_hi);
    out.bin_probability = mass.mass;
    out.miss_probability = mass.miss;
    out.alpha_estimate = bin_midpoint_estimate(bins, out.bin_index);
    std::int64_t truth = truth_count(alpha, bins.block_length);
    out.contains_truth = out.bin_lo <= truth && truth < out.bin_hi;
    out.failure_class = classify_failure(alpha, bins, out.bin_index, exponent_s);
    return out;
}

GentleOutcome run_gentle_block(double alpha, const GentleConfig &cfg, Rng &rng) {
    require_alpha(alpha, "run_gentle_block");
    cfg.validate();
    BinPartition bins = draw_bins(cfg.block_length, cfg.bin_count, rng);
    return measure_with_bins(alpha, bins, cfg.exponent_s, rng);
}

double entanglement_fidelity(double bin_prob) {
    if (!(bin_prob >= -1e-12 && bin_prob <= 1.0 + 1e-12)) {
        throw std::invalid_argument("entanglement_fidelity: probability must lie in [0, 1]");
    }
    return std::sqrt(std::clamp(bin_prob, 0.0, 1.0));
}

double fidelity_deficit(double miss_probability) {
    double q = std::clamp(miss_probability, 0.0, 1.0);
    return q / (1.0 + std::sqrt(1.0 - q));
}

}  // namespace gpress
