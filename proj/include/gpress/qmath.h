#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gpress {

class Rng;

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Unit-norm vector in C^d.
class PureState {
 public:
    /// Throws std::invalid_argument unless |amplitudes| = 1 within 1e-12.
    explicit PureState(Vector amplitudes);

    /// Scales a nonzero vector to unit norm.
    static PureState normalized(const Vector &v);
    static PureState basis(int d, int index);

    int dim() const { return static_cast<int>(amplitudes_.size()); }
    const Vector &amplitudes() const { return amplitudes_; }
    Matrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
    Vector amplitudes_;
};

/// Hermitian, positive semidefinite, unit-trace d x d matrix (d >= 2).
///
/// The stored matrix is the Hermitian part of the input, so entries[i][j] ==
/// conj(entries[j][i]) holds exactly. Construction rejects inputs whose trace is off
/// by more than 1e-12 or whose smallest eigenvalue is below -1e-10.
class DensityMatrix {
 public:
    explicit DensityMatrix(const Matrix &m);

    static DensityMatrix maximally_mixed(int d);
    static DensityMatrix from_pure(const PureState &psi);
    static DensityMatrix diagonal(std::span<const double> probabilities);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix &matrix() const { return m_; }

 private:
    Matrix m_;
};

/// d^2 - 1 traceless Hermitian matrices, orthonormal under (A, B) -> tr(A B).
struct TracelessBasis {
    int dim = 0;
    std::vector<Matrix> elements;
};

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    std::vector<PureState> eigenvectors;

    Matrix reconstruct() const;
};

/// Generalized Gell-Mann matrices scaled to unit Hilbert-Schmidt norm.
///
/// Order: for each pair j < k the symmetric then antisymmetric element, followed by the
/// d - 1 diagonal elements. For d = 2 this yields (X, Y, Z) / sqrt(2).
TracelessBasis gell_mann_basis(int d);

/// c_k = tr(rho sigma_k).
std::vector<double> bloch_decompose(const Matrix &hermitian, const TracelessBasis &basis);
std::vector<double> bloch_decompose(const DensityMatrix &rho, const TracelessBasis &basis);

/// I/d + sum_k c_k sigma_k. Hermitian with unit trace but not necessarily PSD.
Matrix bloch_reconstruct(std::span<const double> c, const TracelessBasis &basis);

/// Eigendecomposition of a Hermitian matrix with deterministic ordering.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is rotated so its first
/// component with modulus above 1e-12 is real and positive. Eigenvalues that agree
/// within 1e-12 are ordered by the lexicographic (real, imag) order of their
/// eigenvectors. Throws std::invalid_argument for non-Hermitian input (tolerance 1e-10).
SpectralDecomposition eig_hermitian(const Matrix &m);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const Matrix &m);

/// -tr rho log2 rho, with 0 log 0 = 0.
double von_neumann_entropy(const DensityMatrix &rho);

/// tr rho (log2 rho - log2 sigma). Returns +infinity when rho has weight above 1e-10 on
/// the kernel of sigma (eigenvalues below 1e-12).
double relative_entropy(const DensityMatrix &rho, const DensityMatrix &sigma);

/// Sum of |eigenvalues(rho - sigma)|, in [0, 2].
double trace_distance(const DensityMatrix &rho, const DensityMatrix &sigma);

/// Frobenius norm of rho - sigma.
double hilbert_schmidt_distance(const DensityMatrix &rho, const DensityMatrix &sigma);

/// Probabilities <v_i|rho|v_i> for an orthonormal basis {v_i}.
std::vector<double> measured_distribution(const DensityMatrix &rho,
                                          std::span<const PureState> basis_vectors);

/// Upper bound on |S(rho) - S(sigma)| over all pairs with ||rho - sigma||_1 <= t.
///
/// Audenaert's sharp form with T = t/2: T log2(d - 1) + h(T) for T <= 1 - 1/d, and
/// log2 d beyond that point (where the two expressions meet).
double fannes_bound(double t, int d);

/// Hilbert-Schmidt random state: G G^dagger / tr(G G^dagger) for a square complex
/// Ginibre matrix G.
DensityMatrix random_density_matrix(int d, Rng &rng);

/// Haar-random unit vector.
PureState random_pure_state(int d, Rng &rng);

/// Classical helpers (bits).
double binary_entropy(double p);
double shannon_entropy(std::span<const double> p);
/// sum_i p_i log2(p_i / q_i); +infinity when some p_i > 0 has q_i == 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace gpress
