#include "gpress/gentle_circuit.h"

#include <cmath>
#include <stdexcept>

#include "gpress/rng.h"

namespace gpress {

namespace {

int bits_for(std::int64_t values) {
    int w = 0;
    while ((std::int64_t{1} << w) < values) {
        ++w;
    }
    return std::max(w, 1);
}

// Statevector over [n system qubits | count register | bin register], system in the low
// bits. Copy i is system bit (n - 1 - i).
class Register {
 public:
    Register(int n, int count_bits, int bin_bits)
        : n_(n), count_bits_(count_bits), bin_bits_(bin_bits),
          amps_(Vector::Zero(Eigen::Index{1} << (n + count_bits + bin_bits))) {}

    void load_system(const Vector &system) {
        amps_.setZero();
        amps_.head(system.size()) = system;
    }

    std::uint64_t count_of(std::uint64_t idx) const {
        return (idx >> n_) & ((std::uint64_t{1} << count_bits_) - 1);
    }
    std::uint64_t bin_of(std::uint64_t idx) const {
        return (idx >> (n_ + count_bits_)) & ((std::uint64_t{1} << bin_bits_) - 1);
    }

    void apply_single(int copy, const Eigen::Matrix2cd &u) {
        const std::uint64_t mask = std::uint64_t{1} << (n_ - 1 - copy);
        const auto size = static_cast<std::uint64_t>(amps_.size());
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            if (idx & mask) continue;
            Complex a0 = amps_[static_cast<Eigen::Index>(idx)];
            Complex a1 = amps_[static_cast<Eigen::Index>(idx | mask)];
            amps_[static_cast<Eigen::Index>(idx)] = u(0, 0) * a0 + u(0, 1) * a1;
            amps_[static_cast<Eigen::Index>(idx | mask)] = u(1, 0) * a0 + u(1, 1) * a1;
        }
    }

    // count -> count + delta (mod 2^count_bits) on the branch where the copy reads |1>.
    void controlled_shift(int copy, std::int64_t delta) {
        const std::uint64_t mask = std::uint64_t{1} << (n_ - 1 - copy);
        const std::uint64_t modulus = std::uint64_t{1} << count_bits_;
        const std::uint64_t count_mask = (modulus - 1) << n_;
        Vector out(amps_.size());
        const auto size = static_cast<std::uint64_t>(amps_.size());
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            std::uint64_t target = idx;
            if (idx & mask) {
                std::uint64_t c = count_of(idx);
                std::uint64_t shifted =
                    (c + static_cast<std::uint64_t>(delta + static_cast<std::int64_t>(modulus))) % modulus;
                target = (idx & ~count_mask) | (shifted << n_);
            }
            out[static_cast<Eigen::Index>(target)] = amps_[static_cast<Eigen::Index>(idx)];
        }
        amps_.swap(out);
    }

    // bin register ^= (bin containing count) - 1. Counts above l are unreachable and
    // map to 0; the map is its own inverse.
    void xor_bin(const BinPartition &bins) {
        Vector out(amps_.size());
        const auto size = static_cast<std::uint64_t>(amps_.size());
        const int shift = n_ + count_bits_;
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            auto c = static_cast<std::int64_t>(count_of(idx));
            std::uint64_t label = c <= bins.block_length ? static_cast<std::uint64_t>(bins.bin_of(c) - 1) : 0;
            std::uint64_t target = idx ^ (label << shift);
            out[static_cast<Eigen::Index>(target)] = amps_[static_cast<Eigen::Index>(idx)];
        }
        amps_.swap(out);
    }

    void project_bin(std::uint64_t label) {
        const auto size = static_cast<std::uint64_t>(amps_.size());
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            if (bin_of(idx) != label) amps_[static_cast<Eigen::Index>(idx)] = 0;
        }
    }

    std::vector<double> count_distribution() const {
        std::vector<double> p(std::size_t{1} << count_bits_, 0.0);
        const auto size = static_cast<std::uint64_t>(amps_.size());
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            p[count_of(idx)] += std::norm(amps_[static_cast<Eigen::Index>(idx)]);
        }
        return p;
    }

    std::vector<double> bin_distribution() const {
        std::vector<double> p(std::size_t{1} << bin_bits_, 0.0);
        const auto size = static_cast<std::uint64_t>(amps_.size());
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            p[bin_of(idx)] += std::norm(amps_[static_cast<Eigen::Index>(idx)]);
        }
        return p;
    }

    Vector system_part() const { return amps_.head(Eigen::Index{1} << n_); }
    double ancilla_norm_squared() const {
        Eigen::Index sys = Eigen::Index{1} << n_;
        return amps_.tail(amps_.size() - sys).squaredNorm();
    }

 private:
    int n_;
    int count_bits_;
    int bin_bits_;
    Vector amps_;
};

// U maps |phi> -> |1> and |phi_perp> -> |0>, so "control on |phi>" is "control on |1>"
// between U and U^dagger.
Eigen::Matrix2cd phi_rotation(const PureState &phi) {
    if (phi.dim() != 2) {
        throw std::invalid_argument("gentle circuit: copies must be qubits");
    }
    Complex a = phi.amplitudes()[0];
    Complex b = phi.amplitudes()[1];
    Eigen::Matrix2cd u;
    // Rows are <phi_perp| and <phi| with phi_perp = (-conj(b), conj(a)).
    u << -b, a, std::conj(a), std::conj(b);
    return u;
}

struct Layout {
    int n;
    int count_bits;
    int bin_bits;
};

Layout layout_for(const SmallSimState &state, const BinPartition &bins) {
    if (state.copies < 1 || state.copies > kCircuitCopyCap) {
        throw std::invalid_argument("gentle circuit: copies must lie in [1, 12]");
    }
    if (bins.block_length != state.copies) {
        throw std::invalid_argument("gentle circuit: bin partition must cover counts 0..n");
    }
    return {state.copies, bits_for(state.copies + 1), bits_for(bins.bin_count())};
}

std::int64_t count_stage(Register &reg, int n, const Eigen::Matrix2cd &u, std::int64_t delta,
                         bool reverse) {
    const Eigen::Matrix2cd ud = u.adjoint();
    for (int step = 0; step < n; ++step) {
        int copy = reverse ? n - 1 - step : step;
        reg.apply_single(copy, u);
        reg.controlled_shift(copy, delta);
        reg.apply_single(copy, ud);
    }
    return 3 * static_cast<std::int64_t>(n);
}

}  // namespace

SmallSimState SmallSimState::product(const DensityMatrix &rho, int n) {
    if (rho.dim() != 2) {
        throw std::invalid_argument("SmallSimState::product: qubit states only");
    }
    if (n < 1 || n > kCircuitCopyCap) {
        throw std::invalid_argument("SmallSimState::product: copies must lie in [1, 12]");
    }
    SpectralDecomposition eig = eig_hermitian(rho.matrix());
    SmallSimState state;
    state.copies = n;
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        double weight = 1.0;
        Vector v = Vector::Ones(1);
        for (int i = 0; i < n; ++i) {
            int a = (x >> (n - 1 - i)) & 1;
            weight *= std::max(0.0, eig.eigenvalues[static_cast<std::size_t>(a)]);
            const Vector &e = eig.eigenvectors[static_cast<std::size_t>(a)].amplitudes();
            Vector next(v.size() * 2);
            for (Eigen::Index k = 0; k < v.size(); ++k) {
                next[2 * k] = v[k] * e[0];
                next[2 * k + 1] = v[k] * e[1];
            }
            v = next;
        }
        if (weight > 0) {
            state.branches.push_back(std::sqrt(weight) * v);
        }
    }
    return state;
}

SmallSimState SmallSimState::pure(const Vector &psi, int n) {
    if (n < 1 || n > kCircuitCopyCap || psi.size() != (Eigen::Index{1} << n)) {
        throw std::invalid_argument("SmallSimState::pure: need a 2^n amplitude vector, n <= 12");
    }
    SmallSimState state;
    state.copies = n;
    state.branches.push_back(psi);
    return state;
}

Matrix SmallSimState::reduced_state() const {
    Eigen::Index dim = Eigen::Index{1} << copies;
    Matrix rho = Matrix::Zero(dim, dim);
    for (const Vector &b : branches) {
        rho += b * b.adjoint();
    }
    return rho;
}

double SmallSimState::norm_squared() const {
    double total = 0;
    for (const Vector &b : branches) {
        total += b.squaredNorm();
    }
    return total;
}

std::vector<double> counting_circuit_distribution(const SmallSimState &state, const PureState &phi) {
    BinPartition trivial{state.copies, {0, static_cast<std::int64_t>(state.copies) + 1}};
    Layout lay = layout_for(state, trivial);
    Eigen::Matrix2cd u = phi_rotation(phi);
    std::vector<double> dist(static_cast<std::size_t>(state.copies + 1), 0.0);
    Register reg(lay.n, lay.count_bits, lay.bin_bits);
    for (const Vector &branch : state.branches) {
        reg.load_system(branch);
        count_stage(reg, lay.n, u, +1, false);
        std::vector<double> p = reg.count_distribution();
        for (std::size_t k = 0; k < dist.size(); ++k) {
            dist[k] += p[k];
        }
    }
    return dist;
}

std::vector<double> gentle_circuit_distribution(const SmallSimState &state, const PureState &phi,
                                                const BinPartition &bins) {
    Layout lay = layout_for(state, bins);
    Eigen::Matrix2cd u = phi_rotation(phi);
    std::vector<double> dist(static_cast<std::size_t>(bins.bin_count()), 0.0);
    Register reg(lay.n, lay.count_bits, lay.bin_bits);
    for (const Vector &branch : state.branches) {
        reg.load_system(branch);
        count_stage(reg, lay.n, u, +1, false);
        reg.xor_bin(bins);
        std::vector<double> p = reg.bin_distribution();
        for (std::size_t j = 0; j < dist.size(); ++j) {
            dist[j] += p[j];
        }
    }
    return dist;
}

CircuitRun run_gentle_circuit_for_bin(const SmallSimState &state, const PureState &phi,
                                      const BinPartition &bins, int j) {
    if (j < 1 || j > bins.bin_count()) {
        throw std::out_of_range("run_gentle_circuit_for_bin: bin index out of range");
    }
    Layout lay = layout_for(state, bins);
    Eigen::Matrix2cd u = phi_rotation(phi);
    Register reg(lay.n, lay.count_bits, lay.bin_bits);

    CircuitRun run;
    run.bin_index = j;
    std::vector<Vector> projected;
    projected.reserve(state.branches.size());
    double probability = 0;
    double residual_sq = 0;
    for (const Vector &branch : state.branches) {
        reg.load_system(branch);
        run.gate_count = count_stage(reg, lay.n, u, +1, false);
        reg.xor_bin(bins);
        reg.project_bin(static_cast<std::uint64_t>(j - 1));
        reg.xor_bin(bins);
        run.gate_count += 3 + count_stage(reg, lay.n, u, -1, true);
        Vector sys = reg.system_part();
        probability += sys.squaredNorm() + reg.ancilla_norm_squared();
        residual_sq += reg.ancilla_norm_squared();
        projected.push_back(sys);
    }
    run.probability = probability;
    run.ancilla_residual = std::sqrt(residual_sq);
    run.post.copies = state.copies;
    if (probability > 0) {
        double scale = 1.0 / std::sqrt(probability);
        Complex overlap = 0;
        for (std::size_t x = 0; x < projected.size(); ++x) {
            Vector out = projected[x] * scale;
            overlap += state.branches[x].dot(out);
            run.post.branches.push_back(std::move(out));
        }
        run.purified_overlap = overlap.real();
    }
    return run;
}

CircuitRun simulate_gentle_circuit(const SmallSimState &state, const PureState &phi,
                                   const BinPartition &bins, Rng &rng) {
    std::vector<double> dist = gentle_circuit_distribution(state, phi, bins);
    int j = static_cast<int>(rng.sample_index(dist)) + 1;
    return run_gentle_circuit_for_bin(state, phi, bins, j);
}

}  // namespace gpress
