#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gpress/gentle.h"
#include "gpress/gentle_circuit.h"
#include "gpress/qmath.h"
#include "gpress/rng.h"
#include "oracles.h"

using namespace gpress;

namespace {

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix power(const Matrix &m, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) out = kron(out, m);
    return out;
}

// Projector onto counts [lo, hi) of |phi> among n copies, built from bit strings.
Matrix bin_projector(const PureState &phi, int n, std::int64_t lo, std::int64_t hi) {
    Matrix p1 = phi.projector();
    Matrix p0 = Matrix::Identity(2, 2) - p1;
    const Eigen::Index dim = Eigen::Index{1} << n;
    Matrix out = Matrix::Zero(dim, dim);
    for (int x = 0; x < (1 << n); ++x) {
        int weight = __builtin_popcount(static_cast<unsigned>(x));
        if (weight < lo || weight >= hi) continue;
        Matrix t = Matrix::Identity(1, 1);
        for (int i = 0; i < n; ++i) t = kron(t, ((x >> (n - 1 - i)) & 1) ? p1 : p0);
        out += t;
    }
    return out;
}

double born(const DensityMatrix &rho, const PureState &phi) {
    return (phi.amplitudes().adjoint() * rho.matrix() * phi.amplitudes())(0, 0).real();
}

BinPartition make_bins(std::int64_t l, std::vector<std::int64_t> interior) {
    BinPartition b;
    b.block_length = l;
    b.boundaries.push_back(0);
    for (auto x : interior) b.boundaries.push_back(x);
    b.boundaries.push_back(l + 1);
    return b;
}

}  // namespace

TEST(SmallSim, ProductPurifiesTensorPower) {
    Rng rng(1);
    DensityMatrix rho = random_density_matrix(2, rng);
    SmallSimState st = SmallSimState::product(rho, 4);
    EXPECT_NEAR(st.norm_squared(), 1.0, 1e-12);
    EXPECT_LT((st.reduced_state() - power(rho.matrix(), 4)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(SmallSimState::product(rho, 13), std::invalid_argument);
    EXPECT_THROW(SmallSimState::product(DensityMatrix::maximally_mixed(3), 2), std::invalid_argument);
}

TEST(Circuit, CountingDistributionIsBinomial) {
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
        DensityMatrix rho = random_density_matrix(2, rng);
        PureState phi = random_pure_state(2, rng);
        for (int n : {1, 3, 6}) {
            auto p = counting_circuit_distribution(SmallSimState::product(rho, n), phi);
            auto q = oracle::binomial_pmf(born(rho, phi), n);
            ASSERT_EQ(p.size(), q.size());
            for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p[k], q[k], 1e-10);
        }
    }
}

TEST(Circuit, BinDistributionMatchesExact) {
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        DensityMatrix rho = random_density_matrix(2, rng);
        PureState phi = random_pure_state(2, rng);
        const int n = 7;
        BinPartition bins = draw_bins(n, 3, rng);
        auto p = gentle_circuit_distribution(SmallSimState::product(rho, n), phi, bins);
        auto q = bin_probabilities(born(rho, phi), bins);
        ASSERT_EQ(p.size(), q.size());
        for (std::size_t j = 0; j < p.size(); ++j) EXPECT_NEAR(p[j], q[j], 1e-10);
    }
}

TEST(Circuit, SingleBinLeavesPureStateUntouched) {
    Rng rng(4);
    const int n = 5;
    Vector psi(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = Complex(rng.normal(), rng.normal());
    psi.normalize();
    SmallSimState st = SmallSimState::pure(psi, n);
    CircuitRun run = run_gentle_circuit_for_bin(st, random_pure_state(2, rng), make_bins(n, {}), 1);
    EXPECT_NEAR(run.probability, 1.0, 1e-12);
    EXPECT_LT((run.post.branches.at(0) - psi).norm(), 1e-10);
    EXPECT_NEAR(run.purified_overlap, 1.0, 1e-10);
}

TEST(Circuit, PostStateIsProjectedState) {
    Rng rng(5);
    for (int n : {3, 5, 6}) {
        DensityMatrix rho = random_density_matrix(2, rng);
        PureState phi = random_pure_state(2, rng);
        BinPartition bins = make_bins(n, {1, n / 2 + 1});
        SmallSimState st = SmallSimState::product(rho, n);
        Matrix joint = power(rho.matrix(), n);
        for (int j = 1; j <= bins.bin_count(); ++j) {
            CircuitRun run = run_gentle_circuit_for_bin(st, phi, bins, j);
            Matrix proj = bin_projector(phi, n, bins.lower(j), bins.upper(j));
            double p = (proj * joint).trace().real();
            EXPECT_NEAR(run.probability, p, 1e-10);
            if (p < 1e-8) continue;
            Matrix expected = proj * joint * proj / p;
            EXPECT_LT((run.post.reduced_state() - expected).cwiseAbs().maxCoeff(), 1e-9);
            EXPECT_LE(run.ancilla_residual, 1e-10);
            EXPECT_NEAR(run.purified_overlap, std::sqrt(p), 1e-9);
            EXPECT_EQ(run.gate_count, 6 * n + 3);
        }
    }
}

TEST(Circuit, SimulatedRunPicksReachableBin) {
    Rng rng(6);
    DensityMatrix rho = random_density_matrix(2, rng);
    PureState phi = random_pure_state(2, rng);
    BinPartition bins = make_bins(4, {2, 2});
    SmallSimState st = SmallSimState::product(rho, 4);
    for (int i = 0; i < 50; ++i) {
        CircuitRun run = simulate_gentle_circuit(st, phi, bins, rng);
        EXPECT_NE(run.bin_index, 2);
        EXPECT_GT(run.probability, 0);
    }
}

TEST(Circuit, RejectsBadInput) {
    Rng rng(7);
    SmallSimState st = SmallSimState::product(DensityMatrix::maximally_mixed(2), 3);
    PureState phi = PureState::basis(2, 0);
    EXPECT_THROW(gentle_circuit_distribution(st, phi, make_bins(4, {2})), std::invalid_argument);
    EXPECT_THROW(run_gentle_circuit_for_bin(st, phi, make_bins(3, {2}), 3), std::out_of_range);
    EXPECT_THROW(SmallSimState::pure(Vector::Zero(4), 3), std::invalid_argument);
}
