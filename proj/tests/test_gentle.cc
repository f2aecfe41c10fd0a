#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gpress/gentle.h"
#include "gpress/qmath.h"
#include "gpress/rng.h"
#include "oracles.h"

using namespace gpress;

namespace {

BinPartition make_bins(std::int64_t l, std::vector<std::int64_t> interior) {
    BinPartition b;
    b.block_length = l;
    b.boundaries.push_back(0);
    for (auto x : interior) b.boundaries.push_back(x);
    b.boundaries.push_back(l + 1);
    return b;
}

double born(const DensityMatrix &rho, const PureState &phi) {
    return (phi.amplitudes().adjoint() * rho.matrix() * phi.amplitudes())(0, 0).real();
}

}  // namespace

TEST(GentleConfig, BinCount) {
    EXPECT_EQ(GentleConfig::from_exponent(1000000, 0.2).bin_count, 15);
    EXPECT_EQ(GentleConfig::from_exponent(10000, 0.25).bin_count, 10);
    EXPECT_EQ(GentleConfig::from_exponent(1, 0.3).bin_count, 1);
    EXPECT_THROW(GentleConfig::from_exponent(100, 0.0), std::invalid_argument);
    EXPECT_THROW(GentleConfig::from_exponent(100, 0.5), std::invalid_argument);
    EXPECT_THROW(GentleConfig::from_exponent(0, 0.2), std::invalid_argument);
}

TEST(DrawBins, ShapeAndEndpoints) {
    Rng rng(1);
    BinPartition b = draw_bins(1000, 16, rng);
    ASSERT_EQ(b.bin_count(), 16);
    EXPECT_EQ(b.boundaries.front(), 0);
    EXPECT_EQ(b.boundaries.back(), 1001);
    EXPECT_TRUE(std::is_sorted(b.boundaries.begin(), b.boundaries.end()));
    for (std::int64_t k = 0; k <= 1000; ++k) {
        int j = b.bin_of(k);
        EXPECT_LE(b.lower(j), k);
        EXPECT_LT(k, b.upper(j));
    }
    EXPECT_THROW(b.bin_of(1001), std::out_of_range);
    EXPECT_THROW(draw_bins(10, 11, rng), std::invalid_argument);
    EXPECT_THROW(draw_bins(10, 0, rng), std::invalid_argument);
}

TEST(DrawBins, BoundariesAreUniform) {
    // pooled interior boundaries over 1000 seeds, chi-square on 100 equal cells
    const std::int64_t l = 1000000, m = 1000;
    std::vector<double> cells(100, 0.0);
    double total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(derive_seed(77, 0, seed));
        BinPartition b = draw_bins(l, m, rng);
        for (std::size_t i = 1; i + 1 < b.boundaries.size(); ++i) {
            std::int64_t x = b.boundaries[i];
            ASSERT_GE(x, 0);
            ASSERT_LE(x, l);
            cells[static_cast<std::size_t>(x * 100 / (l + 1))] += 1;
            total += 1;
        }
    }
    // cell c holds {ceil(c (l+1)/100) .. } counts; all cells have equal width (l+1)/100
    double expect = total / 100;
    double chi2 = 0;
    for (double c : cells) chi2 += (c - expect) * (c - expect) / expect;
    EXPECT_LT(chi2, 134.6);  // 99 dof, p = 0.01
}

TEST(CountPmf, MatchesOracle) {
    for (double a : {0.0, 0.05, 0.37, 0.5, 0.93, 1.0}) {
        for (std::int64_t l : {1, 7, 50, 400}) {
            auto p = count_pmf(a, l);
            auto q = oracle::binomial_pmf(a, l);
            ASSERT_EQ(p.size(), q.size());
            double sum = 0;
            for (std::size_t k = 0; k < p.size(); ++k) {
                EXPECT_NEAR(p[k], q[k], 1e-12);
                sum += p[k];
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(Collective, BruteForceMatchesPmf) {
    Rng rng(2);
    for (int t = 0; t < 6; ++t) {
        int d = 2 + t % 2;
        DensityMatrix rho = random_density_matrix(d, rng);
        PureState phi = random_pure_state(d, rng);
        double a = born(rho, phi);
        for (int l = 1; l <= (d == 2 ? 6 : 4); ++l) {
            auto bf = brute_force_collective(rho, phi, l);
            auto q = oracle::binomial_pmf(a, l);
            for (int k = 0; k <= l; ++k) EXPECT_NEAR(bf[k], q[k], 1e-10);
        }
    }
}

TEST(Collective, OperatorsResolveIdentity) {
    Rng rng(3);
    PureState phi = random_pure_state(2, rng);
    auto ops = collective_operators(phi, 4);
    ASSERT_EQ(ops.size(), 5u);
    Matrix sum = Matrix::Zero(16, 16);
    for (const Matrix &m : ops) {
        EXPECT_LT((m * m - m).norm(), 1e-12);
        sum += m;
    }
    EXPECT_LT((sum - Matrix::Identity(16, 16)).norm(), 1e-12);
    EXPECT_THROW(collective_operators(phi, 9), std::invalid_argument);
}

TEST(BinProbability, SumsAndTails) {
    const std::int64_t l = 200;
    BinPartition b = make_bins(l, {30, 30, 90, 150});
    auto pmf = oracle::binomial_pmf(0.41, l);
    double total = 0;
    auto exact = bin_probabilities(0.41, b);
    ASSERT_EQ(static_cast<int>(exact.size()), b.bin_count());
    for (int j = 1; j <= b.bin_count(); ++j) {
        double manual = 0;
        for (std::int64_t k = b.lower(j); k < b.upper(j); ++k) manual += pmf[static_cast<std::size_t>(k)];
        EXPECT_NEAR(bin_probability(count_pmf(0.41, l), b, j), manual, 1e-12);
        EXPECT_NEAR(exact[static_cast<std::size_t>(j - 1)], manual, 1e-12);
        BinMass m = binomial_interval_mass(0.41, l, b.lower(j), b.upper(j));
        EXPECT_NEAR(m.mass, manual, 1e-12);
        EXPECT_NEAR(m.mass + m.miss, 1.0, 1e-12);
        total += manual;
    }
    EXPECT_NEAR(total, 1, 1e-12);
    EXPECT_EQ(exact[1], 0.0);  // empty bin [30, 30)
}

TEST(BinProbability, TinyMissStaysAccurate) {
    const std::int64_t l = 1000000;
    BinMass m = binomial_interval_mass(0.5, l, 490000, 510001);
    auto pmf = oracle::binomial_pmf(0.5, l);
    double tail = 0;
    for (std::int64_t k = 0; k <= l; ++k)
        if (k < 490000 || k > 510000) tail += pmf[static_cast<std::size_t>(k)];
    ASSERT_GT(tail, 0.0);
    ASSERT_LT(tail, 1e-80);
    EXPECT_NEAR(m.miss / tail, 1.0, 1e-6);
    EXPECT_EQ(m.mass, 1.0);
    BinMass n = binomial_interval_mass(0.5, 100, 0, 45);
    EXPECT_NEAR(n.mass, 0.1356265120369177, 1e-14);
}

TEST(SampleBin, NeverPicksEmptyBinsAndMatchesProbabilities) {
    const std::int64_t l = 60;
    BinPartition b = make_bins(l, {20, 20, 28, 33});
    auto p = bin_probabilities(0.45, b);
    std::vector<int> hits(p.size(), 0);
    Rng rng(4);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++hits[static_cast<std::size_t>(sample_bin(0.45, b, rng) - 1)];
    EXPECT_EQ(hits[1], 0);
    for (std::size_t j = 0; j < p.size(); ++j) {
        double se = std::sqrt(p[j] * (1 - p[j]) / n);
        EXPECT_NEAR(hits[j] / double(n), p[j], 4 * se + 1e-12);
    }
}

TEST(Classify, Examples) {
    const std::int64_t l = 1000000;
    const double s = 0.4;
    // hazard sqrt(l) ln l ~ 13816, reach l^0.6 ln l ~ 54.9e3 around l alpha = 5e5
    BinPartition close = make_bins(l, {495000, 800000});
    EXPECT_EQ(classify_failure(0.5, close, 1, s), FailureClass::TooCloseBoundary);
    BinPartition sparse = make_bins(l, {100000, 900000});
    EXPECT_EQ(classify_failure(0.5, sparse, 2, s), FailureClass::NoNearbyBoundary);
    BinPartition good = make_bins(l, {480000, 520000});
    EXPECT_EQ(classify_failure(0.5, good, 2, s), FailureClass::Success);
    EXPECT_EQ(classify_failure(0.5, good, 1, s), FailureClass::WrongBin);
    EXPECT_EQ(classify_failure(0.5, good, 3, s), FailureClass::WrongBin);
    // endpoints count as nearby boundaries
    BinPartition edge = make_bins(l, {40000, 980000});
    EXPECT_EQ(classify_failure(0.01, edge, 1, s), FailureClass::Success);
    // a single bin only checks containment
    BinPartition one = make_bins(l, {});
    EXPECT_EQ(classify_failure(0.5, one, 1, s), FailureClass::Success);
}

TEST(Classify, Names) {
    EXPECT_EQ(to_string(FailureClass::Success), "success");
    EXPECT_EQ(to_string(FailureClass::TooCloseBoundary), "too_close_boundary");
    EXPECT_EQ(to_string(FailureClass::NoNearbyBoundary), "no_nearby_boundary");
    EXPECT_EQ(to_string(FailureClass::WrongBin), "wrong_bin");
}

TEST(GentleBlock, FailureClassRatesWithinUnionBounds) {
    const std::int64_t l = 1000000;
    const double s = 0.2;
    GentleConfig cfg = GentleConfig::from_exponent(l, s);
    const int seeds = 100000;
    int too_close = 0, no_nearby = 0;
    for (int i = 0; i < seeds; ++i) {
        Rng rng(derive_seed(5, 0, static_cast<std::uint64_t>(i)));
        GentleOutcome o = run_gentle_block(0.3, cfg, rng);
        too_close += o.failure_class == FailureClass::TooCloseBoundary;
        no_nearby += o.failure_class == FailureClass::NoNearbyBoundary;
    }
    const double ld = static_cast<double>(l);
    EXPECT_LE(too_close / double(seeds), 2 * std::pow(ld, s - 0.5) * std::log(ld));
    EXPECT_LE(no_nearby / double(seeds), 10 / ld);
}

TEST(GentleBlock, FailureFractionMatchesPartitionAverage) {
    const std::int64_t l = 10000;
    const double s = 0.25, alpha = 0.37;
    const std::int64_t m = 10;
    double oracle_se = 0;
    double oracle_mean = oracle::block_failure_probability(alpha, l, s, 20000, 1234, &oracle_se);

    GentleConfig cfg = GentleConfig::from_exponent(l, s);
    ASSERT_EQ(cfg.bin_count, m);
    const int trials = 20000;
    int failures = 0;
    for (int i = 0; i < trials; ++i) {
        Rng rng(derive_seed(6, 0, static_cast<std::uint64_t>(i)));
        failures += run_gentle_block(alpha, cfg, rng).failure_class != FailureClass::Success;
    }
    double frac = failures / double(trials);
    double se = std::sqrt(frac * (1 - frac) / trials);
    EXPECT_LE(std::abs(frac - oracle_mean), 4 * std::hypot(se, oracle_se))
        << "library " << frac << " oracle " << oracle_mean;
}

TEST(GentleBlock, SingleBinMidpoint) {
    BinPartition one = make_bins(1000, {});
    EXPECT_DOUBLE_EQ(bin_midpoint_estimate(one, 1), 1001.0 / 2000.0);
    BinPartition b = make_bins(100, {10, 60});
    EXPECT_DOUBLE_EQ(bin_midpoint_estimate(b, 2), 0.35);
}

TEST(GentleBlock, OutcomeConsistency) {
    const std::int64_t l = 100000;
    GentleConfig cfg = GentleConfig::from_exponent(l, 0.3);
    for (int i = 0; i < 2000; ++i) {
        Rng rng(derive_seed(8, 0, static_cast<std::uint64_t>(i)));
        double alpha = 0.05 + 0.9 * (i % 97) / 96.0;
        GentleOutcome o = run_gentle_block(alpha, cfg, rng);
        ASSERT_GE(o.bin_index, 1);
        ASSERT_LE(o.bin_index, cfg.bin_count);
        EXPECT_LT(o.bin_lo, o.bin_hi);
        EXPECT_GE(o.alpha_estimate, o.bin_lo / double(l) - 1e-15);
        EXPECT_LE(o.alpha_estimate, o.bin_hi / double(l) + 1e-15);
        EXPECT_NEAR(o.bin_probability + o.miss_probability, 1.0, 1e-12);
        auto truth = static_cast<std::int64_t>(std::floor(l * alpha));
        EXPECT_EQ(o.contains_truth, o.bin_lo <= truth && truth < o.bin_hi);
        if (o.failure_class == FailureClass::Success) {
            EXPECT_TRUE(o.contains_truth);
            // boundaries sit at least sqrt(l) ln l - 1 counts from floor(l alpha)
            double t = (std::sqrt(double(l)) * std::log(double(l)) - 1) / l;
            EXPECT_LE(o.miss_probability, 2 * std::exp(-2 * l * t * t));
        }
    }
}

TEST(GentleBlock, Deterministic) {
    GentleConfig cfg = GentleConfig::from_exponent(50000, 0.2);
    Rng a(9), b(9);
    for (int i = 0; i < 50; ++i) {
        GentleOutcome x = run_gentle_block(0.6, cfg, a);
        GentleOutcome y = run_gentle_block(0.6, cfg, b);
        EXPECT_EQ(x.bin_index, y.bin_index);
        EXPECT_EQ(x.bin_lo, y.bin_lo);
        EXPECT_EQ(x.failure_class, y.failure_class);
    }
}

TEST(Fidelity, FormulaAndPrecision) {
    EXPECT_DOUBLE_EQ(entanglement_fidelity(0.25), 0.5);
    EXPECT_DOUBLE_EQ(entanglement_fidelity(1.0), 1.0);
    EXPECT_THROW(entanglement_fidelity(1.5), std::invalid_argument);
    EXPECT_NEAR(fidelity_deficit(1e-20) / 5e-21, 1.0, 1e-12);
    EXPECT_NEAR(fidelity_deficit(0.75), 0.5, 1e-15);
    EXPECT_EQ(fidelity_deficit(0.0), 0.0);
}
