#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "gpress/qmath.h"
#include "gpress/qmath_io.h"
#include "gpress/rng.h"
#include "oracles.h"

using namespace gpress;

namespace {

Matrix pauli(char which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
        case 'Y': m(0, 1) = Complex(0, -1); m(1, 0) = Complex(0, 1); break;
        case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    }
    return m;
}

Matrix random_hermitian(int d, Rng &rng) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
    return (m + m.adjoint()) * 0.5;
}

PureState plus_state() {
    Vector v(2);
    v << 1, 1;
    return PureState::normalized(v);
}

}  // namespace

TEST(GellMann, QubitIsScaledPaulis) {
    TracelessBasis b = gell_mann_basis(2);
    ASSERT_EQ(b.elements.size(), 3u);
    const char order[] = {'X', 'Y', 'Z'};
    for (int k = 0; k < 3; ++k) {
        EXPECT_LT((b.elements[k] - pauli(order[k]) / std::numbers::sqrt2).norm(), 1e-15);
    }
}

TEST(GellMann, GramMatrixIsIdentity) {
    for (int d : {2, 3, 4, 5}) {
        TracelessBasis b = gell_mann_basis(d);
        ASSERT_EQ(static_cast<int>(b.elements.size()), d * d - 1);
        for (size_t j = 0; j < b.elements.size(); ++j) {
            EXPECT_LT(std::abs(b.elements[j].trace()), 1e-12);
            EXPECT_LT((b.elements[j] - b.elements[j].adjoint()).norm(), 1e-15);
            for (size_t k = 0; k < b.elements.size(); ++k) {
                Complex ip = (b.elements[j] * b.elements[k]).trace();
                EXPECT_NEAR(ip.real(), j == k ? 1.0 : 0.0, 1e-12);
                EXPECT_NEAR(ip.imag(), 0.0, 1e-12);
            }
        }
    }
}

TEST(GellMann, RejectsSmallDimension) {
    EXPECT_THROW(gell_mann_basis(1), std::invalid_argument);
}

TEST(Bloch, Examples) {
    TracelessBasis b = gell_mann_basis(2);
    for (double c : bloch_decompose(DensityMatrix::maximally_mixed(2), b)) EXPECT_EQ(c, 0.0);
    auto c = bloch_decompose(DensityMatrix::from_pure(PureState::basis(2, 0)), b);
    EXPECT_NEAR(c[0], 0, 1e-15);
    EXPECT_NEAR(c[1], 0, 1e-15);
    EXPECT_NEAR(c[2], 1 / std::numbers::sqrt2, 1e-15);
}

TEST(Bloch, NormMatchesPurity) {
    Rng rng(11);
    for (int d : {2, 3, 4}) {
        TracelessBasis b = gell_mann_basis(d);
        for (int t = 0; t < 50; ++t) {
            DensityMatrix rho = random_density_matrix(d, rng);
            double norm2 = 0;
            for (double c : bloch_decompose(rho, b)) norm2 += c * c;
            double purity = (rho.matrix() * rho.matrix()).trace().real();
            EXPECT_NEAR(norm2, purity - 1.0 / d, 1e-12);
        }
    }
}

TEST(Bloch, RoundTrip) {
    Rng rng(12);
    for (int d : {2, 3}) {
        TracelessBasis b = gell_mann_basis(d);
        for (int t = 0; t < 1000; ++t) {
            DensityMatrix rho = random_density_matrix(d, rng);
            Matrix back = bloch_reconstruct(bloch_decompose(rho, b), b);
            EXPECT_LT((back - rho.matrix()).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Bloch, ReconstructZeroAndNonPsd) {
    TracelessBasis b = gell_mann_basis(3);
    std::vector<double> zero(8, 0.0);
    EXPECT_LT((bloch_reconstruct(zero, b) - Matrix::Identity(3, 3) / 3.0).norm(), 1e-15);

    TracelessBasis q = gell_mann_basis(2);
    std::vector<double> c = {0, 0, 1 / std::numbers::sqrt2 + 0.5};
    Matrix m = bloch_reconstruct(c, q);
    EXPECT_NEAR(m.trace().real(), 1.0, 1e-15);
    EXPECT_LT(min_eigenvalue(m), 0.0);
    EXPECT_THROW(DensityMatrix{m}, std::invalid_argument);
    EXPECT_THROW(bloch_reconstruct(std::vector<double>{0, 0}, q), std::invalid_argument);
}

TEST(Eig, Examples) {
    SpectralDecomposition id = eig_hermitian(Matrix::Identity(2, 2));
    EXPECT_EQ(id.eigenvalues, (std::vector<double>{1, 1}));

    SpectralDecomposition z = eig_hermitian(pauli('Z'));
    EXPECT_NEAR(z.eigenvalues[0], 1, 1e-15);
    EXPECT_NEAR(z.eigenvalues[1], -1, 1e-15);
    EXPECT_LT((z.eigenvectors[0].amplitudes() - PureState::basis(2, 0).amplitudes()).norm(), 1e-15);
    EXPECT_LT((z.eigenvectors[1].amplitudes() - PureState::basis(2, 1).amplitudes()).norm(), 1e-15);
}

TEST(Eig, RandomReconstructionAndOrthonormality) {
    Rng rng(13);
    for (int d : {2, 3, 5, 8}) {
        for (int t = 0; t < 50; ++t) {
            Matrix m = random_hermitian(d, rng);
            SpectralDecomposition e = eig_hermitian(m);
            EXPECT_LT((e.reconstruct() - m).cwiseAbs().maxCoeff(), 1e-10);
            for (int i = 0; i + 1 < d; ++i) EXPECT_GE(e.eigenvalues[i], e.eigenvalues[i + 1]);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Complex ip = e.eigenvectors[i].amplitudes().dot(e.eigenvectors[j].amplitudes());
                    EXPECT_NEAR(std::abs(ip), i == j ? 1.0 : 0.0, 1e-10);
                }
        }
    }
}

TEST(Eig, DeterministicAndPhaseNormalized) {
    Rng rng(14);
    Matrix m = random_hermitian(4, rng);
    SpectralDecomposition a = eig_hermitian(m);
    SpectralDecomposition b = eig_hermitian(m);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(a.eigenvalues[i], b.eigenvalues[i]);
        EXPECT_TRUE(a.eigenvectors[i].amplitudes() == b.eigenvectors[i].amplitudes());
        // first non-negligible component is real and positive
        const Vector &v = a.eigenvectors[i].amplitudes();
        int k = 0;
        while (std::abs(v(k)) <= 1e-12) ++k;
        EXPECT_GT(v(k).real(), 0);
        EXPECT_EQ(v(k).imag(), 0);
    }
}

TEST(Eig, DegenerateOrderingIsStable) {
    // I (+) Z-like block with a repeated eigenvalue; the order must not depend on input phases.
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(2, 2) = 0.0;
    SpectralDecomposition a = eig_hermitian(m);
    EXPECT_EQ(a.eigenvalues[0], 0.5);
    EXPECT_EQ(a.eigenvalues[1], 0.5);
    SpectralDecomposition b = eig_hermitian(m);
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(a.eigenvectors[i].amplitudes() == b.eigenvectors[i].amplitudes());
}

TEST(Eig, RejectsNonHermitian) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1;
    EXPECT_THROW(eig_hermitian(m), std::invalid_argument);
}

TEST(Entropy, Examples) {
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(2)), 1.0, 1e-14);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::from_pure(PureState::basis(2, 0))), 0.0, 1e-14);
    std::vector<double> p = {0.9, 0.1};
    double expected = -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::diagonal(p)), expected, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::diagonal(p)), 0.46899, 1e-4);
}

TEST(Entropy, Bounds) {
    Rng rng(15);
    for (int d : {2, 3, 6}) {
        for (int t = 0; t < 200; ++t) {
            double s = von_neumann_entropy(random_density_matrix(d, rng));
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, std::log2(d) + 1e-12);
        }
    }
}

TEST(RelativeEntropy, Examples) {
    Rng rng(16);
    DensityMatrix rho = random_density_matrix(3, rng);
    EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-10);

    DensityMatrix zero = DensityMatrix::from_pure(PureState::basis(2, 0));
    DensityMatrix one = DensityMatrix::from_pure(PureState::basis(2, 1));
    EXPECT_EQ(relative_entropy(zero, one), std::numeric_limits<double>::infinity());

    std::vector<double> a = {0.5, 0.5}, b = {0.9, 0.1};
    double expected = 0.5 * std::log2(0.5 / 0.9) + 0.5 * std::log2(0.5 / 0.1);
    EXPECT_NEAR(relative_entropy(DensityMatrix::diagonal(a), DensityMatrix::diagonal(b)), expected, 1e-12);
    EXPECT_NEAR(expected, 0.7370, 1e-4);
}

TEST(RelativeEntropy, NonNegative) {
    Rng rng(17);
    for (int t = 0; t < 500; ++t) {
        int d = 2 + t % 3;
        double v = relative_entropy(random_density_matrix(d, rng), random_density_matrix(d, rng));
        ASSERT_TRUE(std::isfinite(v));
        EXPECT_GE(v, -1e-12);
    }
}

TEST(TraceDistance, ExamplesAndNormChain) {
    DensityMatrix zero = DensityMatrix::from_pure(PureState::basis(2, 0));
    DensityMatrix one = DensityMatrix::from_pure(PureState::basis(2, 1));
    EXPECT_NEAR(trace_distance(zero, zero), 0, 1e-15);
    EXPECT_NEAR(trace_distance(zero, one), 2, 1e-14);

    Rng rng(18);
    for (int d : {2, 3, 4}) {
        TracelessBasis b = gell_mann_basis(d);
        for (int t = 0; t < 200; ++t) {
            DensityMatrix r = random_density_matrix(d, rng);
            DensityMatrix s = random_density_matrix(d, rng);
            double t1 = trace_distance(r, s);
            EXPECT_NEAR(t1, trace_distance(s, r), 1e-12);
            double hs = hilbert_schmidt_distance(r, s);
            std::vector<double> cr = bloch_decompose(r, b), cs = bloch_decompose(s, b);
            double via_bloch = 0;
            for (size_t k = 0; k < cr.size(); ++k) via_bloch += (cr[k] - cs[k]) * (cr[k] - cs[k]);
            EXPECT_NEAR(hs, std::sqrt(via_bloch), 1e-9);
            EXPECT_LE(t1, d * hs + 1e-9);
            EXPECT_LE(t1, 2.0 + 1e-12);
        }
    }
}

TEST(MeasuredDistribution, Examples) {
    std::vector<PureState> comp = {PureState::basis(2, 0), PureState::basis(2, 1)};
    std::vector<PureState> diag = {plus_state(), PureState::normalized((Vector(2) << 1, -1).finished())};
    auto p = measured_distribution(DensityMatrix::maximally_mixed(2), diag);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
    p = measured_distribution(DensityMatrix::from_pure(PureState::basis(2, 0)), comp);
    EXPECT_NEAR(p[0], 1, 1e-15);
    EXPECT_NEAR(p[1], 0, 1e-15);
    p = measured_distribution(DensityMatrix::from_pure(plus_state()), comp);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);

    std::vector<PureState> bad = {PureState::basis(2, 0), plus_state()};
    EXPECT_THROW(measured_distribution(DensityMatrix::maximally_mixed(2), bad), std::invalid_argument);
}

TEST(Fannes, ExamplesAndMonotone) {
    EXPECT_EQ(fannes_bound(0, 2), 0.0);
    EXPECT_GE(fannes_bound(2, 2), 1.0);
    for (int d : {2, 3, 5}) {
        double prev = 0;
        for (int i = 0; i <= 400; ++i) {
            double b = fannes_bound(i * 0.005, d);
            EXPECT_GE(b, prev - 1e-15);
            prev = b;
        }
        EXPECT_LE(prev, std::log2(d) + 1e-12);
    }
    EXPECT_THROW(fannes_bound(-0.1, 2), std::invalid_argument);
    EXPECT_THROW(fannes_bound(2.1, 2), std::invalid_argument);
}

TEST(Fannes, DominatesEntropyGapOnRandomPairs) {
    Rng rng(19);
    for (int d : {2, 3}) {
        for (int t = 0; t < 10000; ++t) {
            DensityMatrix r = random_density_matrix(d, rng);
            DensityMatrix s = random_density_matrix(d, rng);
            double gap = std::abs(von_neumann_entropy(r) - von_neumann_entropy(s));
            ASSERT_LE(gap, fannes_bound(std::min(2.0, trace_distance(r, s)), d) + 1e-12);
        }
    }
}

TEST(RandomState, ValidAndDeterministic) {
    Rng a(20), b(20);
    for (int d : {2, 3, 7}) {
        DensityMatrix x = random_density_matrix(d, a);
        DensityMatrix y = random_density_matrix(d, b);
        EXPECT_TRUE(x.matrix() == y.matrix());
        EXPECT_NEAR(x.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_GT(min_eigenvalue(x.matrix()), 0.0);
    }
    EXPECT_THROW(random_density_matrix(1, a), std::invalid_argument);
}

TEST(RandomState, MeanBlochRadiusMatchesHilbertSchmidtOracle) {
    const int samples = 10000;
    Rng rng(21);
    TracelessBasis b = gell_mann_basis(2);
    double sum = 0, sum2 = 0;
    for (int t = 0; t < samples; ++t) {
        double n2 = 0;
        for (double c : bloch_decompose(random_density_matrix(2, rng), b)) n2 += c * c;
        double r = std::sqrt(2 * n2);  // Pauli normalization
        sum += r;
        sum2 += r * r;
    }
    double mean = sum / samples;
    double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    double oracle_se = 0;
    double oracle = oracle::hs_qubit_mean_radius(samples, 99, &oracle_se);
    EXPECT_LE(std::abs(mean - oracle), 3 * std::hypot(se, oracle_se));
    // uniform-in-ball radius law gives E r = 3/4
    EXPECT_LE(std::abs(mean - 0.75), 3 * se);
}

TEST(PureStateType, Validation) {
    Vector v(2);
    v << 1, 1;
    EXPECT_THROW(PureState{v}, std::invalid_argument);
    EXPECT_NEAR(PureState::normalized(v).amplitudes().norm(), 1.0, 1e-15);
    EXPECT_THROW(PureState::normalized(Vector::Zero(2)), std::invalid_argument);
}

TEST(DensityMatrixType, Validation) {
    EXPECT_THROW(DensityMatrix{Matrix::Identity(2, 2)}, std::invalid_argument);
    Matrix m = Matrix::Identity(2, 2) / 2.0;
    m(0, 1) = Complex(0.1, 0.2);
    m(1, 0) = Complex(0.1, -0.2);
    DensityMatrix rho(m);
    EXPECT_EQ(rho.matrix()(0, 1), std::conj(rho.matrix()(1, 0)));
}

TEST(QmathIo, RoundTrip) {
    Rng rng(22);
    DensityMatrix rho = random_density_matrix(3, rng);
    Matrix back = matrix_from_json(matrix_to_json(rho.matrix()));
    EXPECT_TRUE(back == rho.matrix());
    DensityMatrix again = state_from_json(state_to_json(rho));
    EXPECT_LT((again.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(matrix_from_json(nlohmann::json::array({1, 2, 3})), std::invalid_argument);
}
