#include "gpress/qmath.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "gpress/rng.h"

namespace gpress {

namespace {

constexpr double kTraceTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;
constexpr double kHermitianTolerance = 1e-10;
constexpr double kDegeneracyTolerance = 1e-12;
constexpr double kKernelEigenvalue = 1e-12;
constexpr double kKernelWeight = 1e-10;

void require_square(const Matrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() < 1) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
    }
}

void require_same_dim(int a, int b, const char *what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

double xlog2x(double x) {
    return x > 0 ? x * std::log2(x) : 0.0;
}

Vector phase_normalized(Vector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        if (a > 1e-12) {
            v *= std::conj(v[i]) / a;
            v[i] = Complex(a, 0.0);
            break;
        }
    }
    return v;
}

bool lexicographically_less(const Vector &a, const Vector &b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real()) {
            return a[i].real() < b[i].real();
        }
        if (a[i].imag() != b[i].imag()) {
            return a[i].imag() < b[i].imag();
        }
    }
    return false;
}

}  // namespace

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() < 1) {
        throw std::invalid_argument("PureState: empty amplitude vector");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("PureState: amplitudes must have unit norm");
    }
}

PureState PureState::normalized(const Vector &v) {
    double norm = v.norm();
    if (!(norm > 0)) {
        throw std::invalid_argument("PureState::normalized: zero vector");
    }
    return PureState(v / norm);
}

PureState PureState::basis(int d, int index) {
    if (index < 0 || index >= d) {
        throw std::invalid_argument("PureState::basis: index out of range");
    }
    Vector v = Vector::Zero(d);
    v[index] = 1.0;
    return PureState(v);
}

DensityMatrix::DensityMatrix(const Matrix &m) {
    require_square(m, "DensityMatrix");
    if (m.rows() < 2) {
        throw std::invalid_argument("DensityMatrix: dimension must be at least 2");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    m_ = (m + m.adjoint()) * 0.5;
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        m_(i, i) = Complex(m_(i, i).real(), 0.0);
    }
    if (std::abs(m_.trace().real() - 1.0) > kTraceTolerance) {
        throw std::invalid_argument("DensityMatrix: trace must be 1");
    }
    if (min_eigenvalue(m_) < -kPsdTolerance) {
        throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
    }
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
    if (d < 2) {
        throw std::invalid_argument("maximally_mixed: dimension must be at least 2");
    }
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::from_pure(const PureState &psi) {
    return DensityMatrix(psi.projector());
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> probabilities) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(probabilities.size()),
                            static_cast<Eigen::Index>(probabilities.size()));
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = probabilities[i];
    }
    return DensityMatrix(m);
}

Matrix SpectralDecomposition::reconstruct() const {
    Eigen::Index d = eigenvectors.empty() ? 0 : eigenvectors[0].amplitudes().size();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        m += eigenvalues[i] * eigenvectors[i].projector();
    }
    return m;
}

TracelessBasis gell_mann_basis(int d) {
    if (d < 2) {
        throw std::invalid_argument("gell_mann_basis: dimension must be at least 2");
    }
    TracelessBasis basis;
    basis.dim = d;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Matrix sym = Matrix::Zero(d, d);
            sym(j, k) = inv_sqrt2;
            sym(k, j) = inv_sqrt2;
            basis.elements.push_back(sym);

            Matrix anti = Matrix::Zero(d, d);
            anti(j, k) = Complex(0, -inv_sqrt2);
            anti(k, j) = Complex(0, inv_sqrt2);
            basis.elements.push_back(anti);
        }
    }
    for (int l = 1; l < d; ++l) {
        Matrix diag = Matrix::Zero(d, d);
        double scale = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int j = 0; j < l; ++j) {
            diag(j, j) = scale;
        }
        diag(l, l) = -l * scale;
        basis.elements.push_back(diag);
    }
    return basis;
}

std::vector<double> bloch_decompose(const Matrix &hermitian, const TracelessBasis &basis) {
    require_same_dim(static_cast<int>(hermitian.rows()), basis.dim, "bloch_decompose");
    std::vector<double> c;
    c.reserve(basis.elements.size());
    for (const Matrix &sigma : basis.elements) {
        // tr(A B) for Hermitian A, B is the real Frobenius inner product.
        c.push_back((hermitian.cwiseProduct(sigma.transpose())).sum().real());
    }
    return c;
}

std::vector<double> bloch_decompose(const DensityMatrix &rho, const TracelessBasis &basis) {
    return bloch_decompose(rho.matrix(), basis);
}

Matrix bloch_reconstruct(std::span<const double> c, const TracelessBasis &basis) {
    if (c.size() != basis.elements.size()) {
        throw std::invalid_argument("bloch_reconstruct: expected " +
                                    std::to_string(basis.elements.size()) +
                                    " coefficients, got " + std::to_string(c.size()));
    }
    int d = basis.dim;
    Matrix m = Matrix::Identity(d, d) / static_cast<double>(d);
    for (std::size_t k = 0; k < c.size(); ++k) {
        m += c[k] * basis.elements[k];
    }
    return m;
}

SpectralDecomposition eig_hermitian(const Matrix &m) {
    require_square(m, "eig_hermitian");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
        throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
    }
    Matrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eig_hermitian: eigensolver did not converge");
    }
    const Eigen::Index d = h.rows();
    std::vector<double> values(static_cast<std::size_t>(d));
    std::vector<Vector> vectors(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        // Eigen sorts ascending.
        values[static_cast<std::size_t>(i)] = solver.eigenvalues()[d - 1 - i];
        vectors[static_cast<std::size_t>(i)] = phase_normalized(solver.eigenvectors().col(d - 1 - i));
    }

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() &&
               std::abs(values[order[end]] - values[order[start]]) <=
                   kDegeneracyTolerance * std::max(1.0, std::abs(values[order[start]]))) {
            ++end;
        }
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                  order.begin() + static_cast<std::ptrdiff_t>(end),
                  [&](std::size_t a, std::size_t b) {
                      return lexicographically_less(vectors[a], vectors[b]);
                  });
        start = end;
    }

    SpectralDecomposition out;
    for (std::size_t idx : order) {
        out.eigenvalues.push_back(values[idx]);
        out.eigenvectors.push_back(PureState::normalized(vectors[idx]));
    }
    return out;
}

double min_eigenvalue(const Matrix &m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()[0];
}

double von_neumann_entropy(const DensityMatrix &rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double s = 0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        s -= xlog2x(solver.eigenvalues()[i]);
    }
    return std::clamp(s, 0.0, std::log2(static_cast<double>(rho.dim())));
}

double relative_entropy(const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho.dim(), sigma.dim(), "relative_entropy");
    Eigen::SelfAdjointEigenSolver<Matrix> rs(rho.matrix(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> ss(sigma.matrix());
    double neg_entropy = 0;
    for (Eigen::Index i = 0; i < rs.eigenvalues().size(); ++i) {
        neg_entropy += xlog2x(rs.eigenvalues()[i]);
    }
    double cross = 0;
    for (Eigen::Index j = 0; j < ss.eigenvalues().size(); ++j) {
        Vector b = ss.eigenvectors().col(j);
        double weight = (b.adjoint() * rho.matrix() * b)(0, 0).real();
        double mu = ss.eigenvalues()[j];
        if (mu < kKernelEigenvalue) {
            if (weight > kKernelWeight) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        cross += weight * std::log2(mu);
    }
    return std::max(0.0, neg_entropy - cross);
}

double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho.dim(), sigma.dim(), "trace_distance");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix() - sigma.matrix(),
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

double hilbert_schmidt_distance(const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho.dim(), sigma.dim(), "hilbert_schmidt_distance");
    return (rho.matrix() - sigma.matrix()).norm();
}

std::vector<double> measured_distribution(const DensityMatrix &rho,
                                          std::span<const PureState> basis_vectors) {
    const int d = rho.dim();
    if (static_cast<int>(basis_vectors.size()) != d) {
        throw std::invalid_argument("measured_distribution: need exactly d basis vectors");
    }
    for (std::size_t i = 0; i < basis_vectors.size(); ++i) {
        require_same_dim(basis_vectors[i].dim(), d, "measured_distribution");
        for (std::size_t j = i + 1; j < basis_vectors.size(); ++j) {
            Complex overlap = basis_vectors[i].amplitudes().dot(basis_vectors[j].amplitudes());
            if (std::abs(overlap) > 1e-10) {
                throw std::invalid_argument("measured_distribution: basis is not orthonormal");
            }
        }
    }
    std::vector<double> p;
    p.reserve(basis_vectors.size());
    for (const PureState &v : basis_vectors) {
        const Vector &a = v.amplitudes();
        p.push_back(std::max(0.0, (a.adjoint() * rho.matrix() * a)(0, 0).real()));
    }
    return p;
}

double binary_entropy(double p) {
    return -xlog2x(p) - xlog2x(1.0 - p);
}

double fannes_bound(double t, int d) {
    if (!(t >= 0.0 && t <= 2.0)) {
        throw std::invalid_argument("fannes_bound: trace distance must lie in [0, 2]");
    }
    if (d < 2) {
        throw std::invalid_argument("fannes_bound: dimension must be at least 2");
    }
    double half = t / 2.0;
    double knee = 1.0 - 1.0 / d;
    if (half >= knee) {
        return std::log2(static_cast<double>(d));
    }
    return half * std::log2(static_cast<double>(d - 1)) + binary_entropy(half);
}

DensityMatrix random_density_matrix(int d, Rng &rng) {
    if (d < 2) {
        throw std::invalid_argument("random_density_matrix: dimension must be at least 2");
    }
    Matrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double re = rng.normal();
            double im = rng.normal();
            g(i, j) = Complex(re, im);
        }
    }
    Matrix w = g * g.adjoint();
    return DensityMatrix(w / w.trace().real());
}

PureState random_pure_state(int d, Rng &rng) {
    Vector v(d);
    for (int i = 0; i < d; ++i) {
        double re = rng.normal();
        double im = rng.normal();
        v[i] = Complex(re, im);
    }
    return PureState::normalized(v);
}

double shannon_entropy(std::span<const double> p) {
    double h = 0;
    for (double x : p) {
        h -= xlog2x(x);
    }
    return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) {
            continue;
        }
        if (q[i] <= 0) {
            return std::numeric_limits<double>::infinity();
        }
        total += p[i] * std::log2(p[i] / q[i]);
    }
    return std::max(0.0, total);
}

}  // namespace gpress
