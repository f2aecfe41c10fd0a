#pragma once

// Reference computations written independently of the library, used as test oracles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Binomial(l, a) pmf by direct log-gamma evaluation.
inline std::vector<double> binomial_pmf(double a, int64_t l) {
    std::vector<double> p(static_cast<size_t>(l + 1), 0.0);
    if (a <= 0) {
        p[0] = 1;
        return p;
    }
    if (a >= 1) {
        p[static_cast<size_t>(l)] = 1;
        return p;
    }
    for (int64_t k = 0; k <= l; ++k) {
        double lg = std::lgamma(l + 1.0) - std::lgamma(k + 1.0) - std::lgamma(l - k + 1.0) +
                    k * std::log(a) + (l - k) * std::log1p(-a);
        p[static_cast<size_t>(k)] = std::exp(lg);
    }
    return p;
}

// Probability that one gentle block fails, averaged over `partitions` independently drawn
// bin partitions. A partition fails outright when an interior boundary lies within
// sqrt(l) ln l of l*alpha or one side of l*alpha has no boundary within l^(1-s) ln l;
// otherwise it fails with the binomial mass outside the bin holding floor(l*alpha).
inline double block_failure_probability(double alpha, int64_t l, double s, int partitions, uint64_t seed,
                                        double *se) {
    const auto m = std::max<int64_t>(1, static_cast<int64_t>(std::floor(std::pow(double(l), s))));
    auto pmf = binomial_pmf(alpha, l);
    std::vector<double> cdf(pmf.size() + 1, 0.0);
    for (size_t k = 0; k < pmf.size(); ++k) cdf[k + 1] = cdf[k] + pmf[k];
    const double center = double(l) * alpha;
    const auto truth = static_cast<int64_t>(std::floor(center));
    const double hazard = std::sqrt(double(l)) * std::log(double(l));
    const double reach = std::pow(double(l), 1 - s) * std::log(double(l));

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int64_t> pos(0, l);
    double sum = 0, sum2 = 0;
    for (int t = 0; t < partitions; ++t) {
        std::vector<int64_t> b = {0};
        for (int64_t i = 1; i < m; ++i) b.push_back(pos(gen));
        std::sort(b.begin() + 1, b.end());
        b.push_back(l + 1);
        double fail;
        bool hazard_hit = false;
        for (int64_t i = 1; i < m; ++i) hazard_hit |= std::abs(double(b[size_t(i)]) - center) < hazard;
        bool left = false, right = false;
        for (auto x : b) {
            left |= x >= center - reach && x <= center;
            right |= x >= center && x <= center + reach;
        }
        if (m > 1 && (hazard_hit || !left || !right)) {
            fail = 1;
        } else {
            auto hi = std::upper_bound(b.begin(), b.end(), truth);
            // the pmf sum drifts a few ulps from 1; never let it go negative
            fail = std::max(0.0, 1 - (cdf[size_t(*hi)] - cdf[size_t(*(hi - 1))]));
        }
        sum += fail;
        sum2 += fail * fail;
    }
    double mean = sum / partitions;
    if (se) *se = std::sqrt(std::max(0.0, sum2 / partitions - mean * mean) / partitions);
    return mean;
}

inline double binary_kl_bits(double p, double q) {
    auto term = [](double x, double y) {
        if (x <= 0) return 0.0;
        if (y <= 0) return std::numeric_limits<double>::infinity();
        return x * std::log2(x / y);
    };
    return term(p, q) + term(1 - p, 1 - q);
}

inline double binary_entropy_bits(double p) {
    if (p <= 0 || p >= 1) return 0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// Golden-section maximization of a unimodal function on [a, b].
inline double golden_max(const std::function<double(double)> &f, double a, double b, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return std::max(fc, fd);
}

// Legendre transform of the natural-log cumulant of the code length l_i = -log2 m_i under
// q, sup_theta [theta R - ln sum q_i 2^(theta l_i ln 2)], converted to bits.
inline double legendre_rate_bits(const std::vector<double> &q, const std::vector<double> &model, double rate,
                                 double theta_max = 60) {
    auto objective = [&](double theta) {
        double z = 0;
        for (size_t i = 0; i < q.size(); ++i) {
            if (q[i] > 0) z += q[i] * std::exp(theta * -std::log2(model[i]));
        }
        return theta * rate - std::log(z);
    };
    return std::max(0.0, golden_max(objective, 0.0, theta_max)) / std::log(2.0);
}

// Overflow exponent for a qubit by brute force. Bloch components (x, y, z) of sigma on
// a Cartesian grid of spacing h restricted to |r| <= r_max; for each (x, y) the best z
// is found in closed form because the objective separates into per-axis terms and the
// z-term is convex with its minimum at the target's z component.
inline double qubit_exponent_grid(const double rho_bloch[3], double r_max, double h = 1e-3) {
    auto axis_term = [&](int axis, double v) {
        return binary_kl_bits(0.5 * (1 + v), 0.5 * (1 + rho_bloch[axis]));
    };
    const int steps = static_cast<int>(std::floor(r_max / h));
    std::vector<double> tx(2 * steps + 1), ty(2 * steps + 1);
    for (int i = -steps; i <= steps; ++i) {
        tx[static_cast<size_t>(i + steps)] = axis_term(0, i * h);
        ty[static_cast<size_t>(i + steps)] = axis_term(1, i * h);
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = -steps; i <= steps; ++i) {
        double x = i * h;
        for (int j = -steps; j <= steps; ++j) {
            double y = j * h;
            double rest = r_max * r_max - x * x - y * y;
            if (rest < 0) continue;
            double zmax = std::sqrt(rest);
            double z = std::clamp(rho_bloch[2], -zmax, zmax);
            double v = tx[static_cast<size_t>(i + steps)] + ty[static_cast<size_t>(j + steps)] + axis_term(2, z);
            best = std::min(best, v);
        }
    }
    return best / 6.0;
}

// Radius of the qubit Bloch ball with entropy >= R.
inline double qubit_radius(double rate) {
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (binary_entropy_bits(0.5 * (1 + mid)) > rate) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Mean Bloch-vector length of Hilbert-Schmidt random qubits from an independent sampler:
// G G^dagger / tr for a 2x2 complex Gaussian G.
inline double hs_qubit_mean_radius(int samples, uint64_t seed, double *se) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    double sum = 0, sum2 = 0;
    for (int s = 0; s < samples; ++s) {
        std::complex<double> g[2][2];
        for (auto &row : g)
            for (auto &e : row) e = {n01(gen), n01(gen)};
        std::complex<double> m[2][2] = {};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) m[i][j] += g[i][k] * std::conj(g[j][k]);
        double tr = (m[0][0] + m[1][1]).real();
        double x = 2 * m[0][1].real() / tr;
        double y = -2 * m[0][1].imag() / tr;
        double z = (m[0][0] - m[1][1]).real() / tr;
        double r = std::sqrt(x * x + y * y + z * z);
        sum += r;
        sum2 += r * r;
    }
    double mean = sum / samples;
    if (se) *se = std::sqrt((sum2 / samples - mean * mean) / samples);
    return mean;
}

}  // namespace oracle
