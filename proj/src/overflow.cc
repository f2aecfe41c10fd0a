#include "gpress/overflow.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gpress/rng.h"

namespace gpress {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRawThreshold = 1e-3;
constexpr std::uint64_t kMinHits = 10;

struct Tilted {
    double theta = 0;
    double log_z = 0;  // ln sum_i q_i e^(theta l_i)
    std::vector<double> probs;
};

Tilted tilt(std::span<const double> q, std::span<const double> len, double theta) {
    double shift = -kInf;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0) {
            shift = std::max(shift, theta * len[i]);
        }
    }
    Tilted t;
    t.theta = theta;
    t.probs.assign(q.size(), 0.0);
    double z = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0) {
            t.probs[i] = q[i] * std::exp(theta * len[i] - shift);
            z += t.probs[i];
        }
    }
    for (double &p : t.probs) {
        p /= z;
    }
    t.log_z = std::log(z) + shift;
    return t;
}

double tilted_mean(std::span<const double> q, std::span<const double> len, double theta) {
    Tilted t = tilt(q, len, theta);
    double m = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        m += t.probs[i] * len[i];
    }
    return m;
}

struct LengthRange {
    double mean = 0;
    double max = -kInf;
    double mass_at_max = 0;
};

LengthRange length_range(std::span<const double> q, std::span<const double> len) {
    LengthRange r;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0) {
            r.mean += q[i] * len[i];
            r.max = std::max(r.max, len[i]);
        }
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0 && len[i] >= r.max - 1e-12) {
            r.mass_at_max += q[i];
        }
    }
    return r;
}

// theta >= 0 with tilted mean equal to target (mean < target < max).
double solve_tilt(std::span<const double> q, std::span<const double> len, double target) {
    double lo = 0;
    double hi = 1;
    while (tilted_mean(q, len, hi) < target && hi < 1e6) {
        hi *= 2;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (tilted_mean(q, len, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double rate_function_nats(std::span<const double> q, std::span<const double> len, double rate) {
    LengthRange r = length_range(q, len);
    if (rate <= r.mean) {
        return 0;
    }
    if (rate > r.max + 1e-12) {
        return kInf;
    }
    if (rate >= r.max - 1e-12) {
        return -std::log(r.mass_at_max);
    }
    double theta = solve_tilt(q, len, rate);
    return theta * rate - tilt(q, len, theta).log_z;
}

std::vector<double> code_lengths(std::span<const double> model) {
    std::vector<double> len(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (!(model[i] > 0 && model[i] <= 1)) {
            throw std::invalid_argument("model probabilities must lie in (0, 1]");
        }
        len[i] = -std::log2(model[i]);
    }
    return len;
}

// Minimal Nelder-Mead on R^k.
struct NelderMeadResult {
    std::vector<double> x;
    double value = kInf;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                             std::vector<double> start, double step, int max_iter, double tol) {
    const std::size_t k = start.size();
    std::vector<std::vector<double>> simplex(k + 1, start);
    for (std::size_t i = 0; i < k; ++i) {
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        values[i] = f(simplex[i]);
    }
    auto combine = [&](const std::vector<double> &a, const std::vector<double> &b, double t) {
        std::vector<double> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            out[i] = a[i] + t * (b[i] - a[i]);
        }
        return out;
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> v2;
        for (std::size_t i : order) {
            s2.push_back(simplex[i]);
            v2.push_back(values[i]);
        }
        simplex = std::move(s2);
        values = std::move(v2);
        if (std::isfinite(values[k]) && values[k] - values[0] <= tol) {
            double spread = 0;
            for (std::size_t i = 1; i <= k; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    spread = std::max(spread, std::abs(simplex[i][j] - simplex[0][j]));
                }
            }
            if (spread < 1e-10) {
                break;
            }
        }
        std::vector<double> centroid(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                centroid[j] += simplex[i][j] / static_cast<double>(k);
            }
        }
        std::vector<double> reflected = combine(centroid, simplex[k], -1.0);
        double fr = f(reflected);
        if (fr < values[0]) {
            std::vector<double> expanded = combine(centroid, simplex[k], -2.0);
            double fe = f(expanded);
            if (fe < fr) {
                simplex[k] = expanded;
                values[k] = fe;
            } else {
                simplex[k] = reflected;
                values[k] = fr;
            }
            continue;
        }
        if (fr < values[k - 1]) {
            simplex[k] = reflected;
            values[k] = fr;
            continue;
        }
        bool outside = fr < values[k];
        std::vector<double> contracted = combine(centroid, outside ? reflected : simplex[k], 0.5);
        double fc = f(contracted);
        if (fc < std::min(fr, values[k])) {
            simplex[k] = contracted;
            values[k] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= k; ++i) {
            simplex[i] = combine(simplex[0], simplex[i], 0.5);
            values[i] = f(simplex[i]);
        }
    }
    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {simplex[best], values[best]};
}

class MeasuredObjective {
 public:
    MeasuredObjective(const DensityMatrix &rho, const TracelessBasis &basis) : basis_(basis) {
        const int d = basis.dim;
        for (const Matrix &e : basis.elements) {
            SpectralDecomposition eig = eig_hermitian(e);
            std::vector<double> p(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                const Vector &v = eig.eigenvectors[static_cast<std::size_t>(i)].amplitudes();
                p[static_cast<std::size_t>(i)] = std::max(0.0, (v.adjoint() * rho.matrix() * v)(0, 0).real());
            }
            vectors_.push_back(std::move(eig.eigenvectors));
            rho_dist_.push_back(std::move(p));
        }
        norm_ = static_cast<double>(d) * (static_cast<double>(d) * d - 1.0);
    }

    double operator()(const Matrix &sigma) const {
        double total = 0;
        for (std::size_t k = 0; k < vectors_.size(); ++k) {
            for (std::size_t i = 0; i < vectors_[k].size(); ++i) {
                const Vector &v = vectors_[k][i].amplitudes();
                double ps = std::max(0.0, (v.adjoint() * sigma * v)(0, 0).real());
                double pr = rho_dist_[k][i];
                if (ps <= 0) {
                    continue;
                }
                if (pr <= 0) {
                    return kInf;
                }
                total += ps * std::log2(ps / pr);
            }
        }
        return std::max(0.0, total / norm_);
    }

    const TracelessBasis &basis() const { return basis_; }

 private:
    const TracelessBasis &basis_;
    std::vector<std::vector<PureState>> vectors_;
    std::vector<std::vector<double>> rho_dist_;
    double norm_ = 1;
};

// Radius of the Bloch sphere (Pauli normalization) on which a qubit has entropy R.
double qubit_radius_for_entropy(double rate) {
    if (rate >= 1.0) {
        return 0;
    }
    if (rate <= 0) {
        return 1;
    }
    double lo = 0;
    double hi = 1;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (binary_entropy(0.5 * (1 + mid)) > rate ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> sphere_coefficients(double radius, double theta, double phi) {
    // Gell-Mann coefficients for d = 2 are the Pauli Bloch components over sqrt(2).
    const double scale = radius / std::numbers::sqrt2;
    return {scale * std::sin(theta) * std::cos(phi), scale * std::sin(theta) * std::sin(phi),
            scale * std::cos(theta)};
}

ExponentResult qubit_exponent(const MeasuredObjective &objective, double rate) {
    const double radius = qubit_radius_for_entropy(rate);
    const TracelessBasis &basis = objective.basis();
    auto value_at = [&](double theta, double phi) {
        std::vector<double> c = sphere_coefficients(radius, theta, phi);
        return objective(bloch_reconstruct(c, basis));
    };
    ExponentResult result;
    result.certified = true;
    if (radius < 1e-15) {
        result.minimizer = {0, 0, 0};
        result.value = objective(bloch_reconstruct(result.minimizer, basis));
        return result;
    }

    constexpr int kTheta = 60;
    constexpr int kPhi = 120;
    struct Seed {
        double value, theta, phi;
    };
    std::vector<Seed> seeds;
    for (int a = 0; a <= kTheta; ++a) {
        double theta = std::numbers::pi * a / kTheta;
        for (int b = 0; b < kPhi; ++b) {
            double phi = 2 * std::numbers::pi * b / kPhi;
            seeds.push_back({value_at(theta, phi), theta, phi});
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const Seed &x, const Seed &y) { return x.value < y.value; });

    result.value = kInf;
    const double step = std::numbers::pi / kTheta;
    for (std::size_t s = 0; s < std::min<std::size_t>(4, seeds.size()); ++s) {
        NelderMeadResult nm = nelder_mead(
            [&](const std::vector<double> &x) { return value_at(x[0], x[1]); },
            {seeds[s].theta, seeds[s].phi}, step, 4000, 1e-15);
        if (nm.value < result.value) {
            result.value = nm.value;
            result.minimizer = sphere_coefficients(radius, nm.x[0], nm.x[1]);
        }
    }
    if (!(seeds.front().value >= result.value)) {
        result.value = seeds.front().value;
        result.minimizer = sphere_coefficients(radius, seeds.front().theta, seeds.front().phi);
    }
    return result;
}

// Mixes sigma toward I/d by the smallest weight making it PSD with entropy >= R.
Matrix retract(const Matrix &sigma, double rate) {
    const int d = static_cast<int>(sigma.rows());
    const Matrix mixed = Matrix::Identity(d, d) / static_cast<double>(d);
    auto ok = [&](double t) {
        Matrix m = (1 - t) * sigma + t * mixed;
        SpectralDecomposition eig = eig_hermitian((m + m.adjoint()) * 0.5);
        if (eig.eigenvalues.back() < 0) {
            return false;
        }
        return shannon_entropy(eig.eigenvalues) >= rate;
    };
    if (ok(0)) {
        return sigma;
    }
    double lo = 0;
    double hi = 1;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return (1 - hi) * sigma + hi * mixed;
}

ExponentResult general_exponent(const DensityMatrix &rho, const MeasuredObjective &objective, double rate) {
    const TracelessBasis &basis = objective.basis();
    const int d = basis.dim;
    auto value_at = [&](const std::vector<double> &c) {
        return objective(retract(bloch_reconstruct(c, basis), rate));
    };
    std::vector<std::vector<double>> starts;
    starts.push_back(bloch_decompose(DensityMatrix(retract(rho.matrix(), rate)), basis));
    Rng rng(0x5eed0f0e7f10f);
    for (int i = 0; i < 7; ++i) {
        starts.push_back(bloch_decompose(random_density_matrix(d, rng), basis));
    }
    ExponentResult result;
    result.certified = false;
    result.value = kInf;
    for (const std::vector<double> &start : starts) {
        NelderMeadResult nm = nelder_mead(value_at, start, 0.05, 20000, 1e-14);
        if (nm.value < result.value) {
            result.value = nm.value;
            Matrix best = retract(bloch_reconstruct(nm.x, basis), rate);
            result.minimizer = bloch_decompose(best, basis);
        }
    }
    return result;
}

}  // namespace

double code_length_rate_function(std::span<const double> q, std::span<const double> model, double rate) {
    if (q.size() != model.size() || q.empty()) {
        throw std::invalid_argument("code_length_rate_function: size mismatch");
    }
    std::vector<double> len = code_lengths(model);
    return rate_function_nats(q, len, rate) / std::numbers::ln2;
}

OverflowEstimate overflow_probability_mc(const DensityMatrix &rho, const RegularizedEstimate &est,
                                         std::uint64_t n, double rate, std::uint64_t trials, Rng &rng) {
    if (!(rate > 0) || !std::isfinite(rate)) {
        throw std::invalid_argument("overflow_probability_mc: R must be positive and finite");
    }
    if (n == 0 || trials == 0) {
        throw std::invalid_argument("overflow_probability_mc: n and trials must be positive");
    }
    OverflowEstimate out;
    if (rate > static_cast<double>(raw_symbol_bits(est.dim))) {
        // the raw fallback caps the payload, nothing to sample
        out.upper_bound = 0;
        return out;
    }
    out.trials = trials;
    const std::vector<double> q = diagonal_distribution(rho, est);
    const std::vector<double> len = code_lengths(est.model_probabilities());
    const LengthRange range = length_range(q, len);
    const double nd = static_cast<double>(n);
    const double threshold = nd * rate;

    const double chernoff = std::exp(-nd * rate_function_nats(q, len, rate));
    Tilted sampler = tilt(q, len, 0.0);
    if (chernoff <= kRawThreshold) {
        double target = std::min(rate, range.max - 1e-9 * (range.max - range.mean));
        sampler = tilt(q, len, solve_tilt(q, len, target));
        out.importance_sampled = true;
        out.tilt = sampler.theta;
    }

    double sum_w = 0;
    double sum_w2 = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        SymbolSequence symbols = sample_symbols(sampler.probs, n, rng);
        double total_len = 0;
        for (std::uint8_t s : symbols.symbols) {
            total_len += len[s];
        }
        EncodedBlob blob = encode(symbols, est);
        if (static_cast<double>(blob.payload_bits) >= threshold) {
            double w = out.importance_sampled
                           ? std::exp(nd * sampler.log_z - sampler.theta * total_len)
                           : 1.0;
            ++out.hits;
            sum_w += w;
            sum_w2 += w * w;
        }
    }
    const double m = static_cast<double>(trials);
    out.probability = sum_w / m;
    double var = std::max(0.0, sum_w2 / m - out.probability * out.probability);
    out.standard_error = trials > 1 ? std::sqrt(var / (m - 1)) : 0.0;
    out.upper_bound_only = out.hits < kMinHits;
    if (out.importance_sampled) {
        out.upper_bound = std::min(1.0, std::max(chernoff, out.probability + 3 * out.standard_error));
    } else if (out.hits == 0) {
        out.upper_bound = std::min(1.0, 3.0 / m);
    } else {
        out.upper_bound = std::min(1.0, out.probability + 3 * out.standard_error);
    }
    return out;
}

double averaged_measured_relative_entropy(const Matrix &sigma, const DensityMatrix &rho,
                                          const TracelessBasis &basis) {
    if (sigma.rows() != rho.dim() || basis.dim != rho.dim()) {
        throw std::invalid_argument("averaged_measured_relative_entropy: dimension mismatch");
    }
    return MeasuredObjective(rho, basis)(sigma);
}

ExponentResult overflow_exponent(const DensityMatrix &rho, double rate, const TracelessBasis &basis) {
    const int d = rho.dim();
    if (basis.dim != d) {
        throw std::invalid_argument("overflow_exponent: basis dimension mismatch");
    }
    if (!(rate >= 0 && rate <= std::log2(static_cast<double>(d)) + 1e-12)) {
        throw std::invalid_argument("overflow_exponent: R must lie in [0, log2 d]");
    }
    if (von_neumann_entropy(rho) >= rate) {
        ExponentResult zero;
        zero.certified = true;
        zero.minimizer = bloch_decompose(rho, basis);
        return zero;
    }
    MeasuredObjective objective(rho, basis);
    return d == 2 ? qubit_exponent(objective, rate) : general_exponent(rho, objective, rate);
}

double overflow_exponent_analytic(const DensityMatrix &rho, double rate, const TracelessBasis &basis) {
    return overflow_exponent(rho, rate, basis).value;
}

}  // namespace gpress
