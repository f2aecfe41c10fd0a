#include "gpress/tomography.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "gpress/qmath_io.h"
#include "gpress/rng.h"

namespace gpress {

namespace {

constexpr double kCertificatePsd = 1e-9;
constexpr double kCertificateTrace = 1e-9;
constexpr double kCertificateSlack = 1e-7;

// Euclidean projection of a real vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd &v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double running = 0;
    double theta = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        running += u[j];
        double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0) {
            theta = candidate;
        }
    }
    return (v.array() - theta).max(0.0).matrix();
}

// Frobenius projection onto {X >= 0, tr X = 1}.
Matrix project_to_states(const Matrix &y) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((y + y.adjoint()) * 0.5);
    Eigen::VectorXd lambda = project_to_simplex(solver.eigenvalues());
    const Matrix &v = solver.eigenvectors();
    return v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
}

double expectation(const Matrix &m, const Vector &phi) {
    return (phi.adjoint() * m * phi)(0, 0).real();
}

void check_obviously_infeasible(const std::vector<BinConstraint> &constraints) {
    for (std::size_t a = 0; a < constraints.size(); ++a) {
        for (std::size_t b = a + 1; b < constraints.size(); ++b) {
            double overlap = std::abs(constraints[a].phi.amplitudes().dot(constraints[b].phi.amplitudes()));
            if (overlap > 1.0 - 1e-12 &&
                std::max(constraints[a].lo, constraints[b].lo) >
                    std::min(constraints[a].hi, constraints[b].hi)) {
                throw InfeasibleError("feasibility_solve: disjoint intervals for the same vector");
            }
        }
    }
}

}  // namespace

BlockSchedule block_schedule(std::int64_t n, int d, const TracelessBasis &basis) {
    if (d < 2 || basis.dim != d) {
        throw std::invalid_argument("block_schedule: basis dimension mismatch");
    }
    const std::int64_t count = static_cast<std::int64_t>(d) * (static_cast<std::int64_t>(d) * d - 1);
    if (n < count) {
        throw std::invalid_argument("block_schedule: need at least d(d^2-1) = " +
                                    std::to_string(count) + " copies");
    }
    BlockSchedule schedule;
    schedule.n = n;
    schedule.d = d;
    schedule.block_length = n / count;
    std::int64_t next = 0;
    for (std::size_t k = 0; k < basis.elements.size(); ++k) {
        SpectralDecomposition eig = eig_hermitian(basis.elements[k]);
        for (int i = 0; i < d; ++i) {
            schedule.blocks.push_back(Block{static_cast<int>(k) + 1, i + 1, next,
                                            schedule.block_length,
                                            eig.eigenvectors[static_cast<std::size_t>(i)]});
            next += schedule.block_length;
        }
    }
    return schedule;
}

BlockMeasurements measure_blocks(const DensityMatrix &rho_true, const BlockSchedule &schedule,
                                 double exponent_s, Rng &rng) {
    if (rho_true.dim() != schedule.d) {
        throw std::invalid_argument("measure_blocks: state dimension does not match schedule");
    }
    const std::uint64_t master = rng.next();
    const GentleConfig cfg = GentleConfig::from_exponent(schedule.block_length, exponent_s);
    const double l = static_cast<double>(schedule.block_length);

    BlockMeasurements out;
    out.declared_success = true;
    out.all_contain_truth = true;
    double log_fidelity = 0;
    for (std::size_t b = 0; b < schedule.blocks.size(); ++b) {
        const Block &block = schedule.blocks[b];
        Rng block_rng(derive_seed(master, 0, b));
        double alpha = std::clamp(expectation(rho_true.matrix(), block.vector.amplitudes()), 0.0, 1.0);
        GentleOutcome outcome = run_gentle_block(alpha, cfg, block_rng);

        double lo = static_cast<double>(outcome.bin_lo) / l;
        double hi = std::min(1.0, static_cast<double>(outcome.bin_hi) / l);
        out.constraints.push_back(BinConstraint{lo, hi, block.vector});
        out.epsilon = std::max(out.epsilon, hi - lo);
        out.declared_success = out.declared_success && outcome.failure_class == FailureClass::Success;
        out.all_contain_truth = out.all_contain_truth && outcome.contains_truth;
        log_fidelity += 0.5 * std::log1p(-std::min(outcome.miss_probability, 1.0));
        out.outcomes.push_back(outcome);
    }
    out.fidelity_deficit = -std::expm1(log_fidelity);
    out.fidelity_proxy = std::exp(log_fidelity);
    return out;
}

TomographyResult run_gentle_tomography(const DensityMatrix &rho_true, std::int64_t n, double s,
                                       Rng &rng) {
    if (!(s > 0.0 && s < 0.5)) {
        throw std::invalid_argument("run_gentle_tomography: s must lie in (0, 1/2)");
    }
    const int d = rho_true.dim();
    BlockSchedule schedule = block_schedule(n, d, gell_mann_basis(d));
    TomographyResult result;
    result.measurements = measure_blocks(rho_true, schedule, s, rng);
    result.declared_success = result.measurements.declared_success;
    result.epsilon = result.measurements.epsilon;
    result.trace_norm_bound = trace_norm_error_bound(result.epsilon, d);
    try {
        result.estimate = feasibility_solve(result.measurements.constraints, d);
        result.encoder_observed_success = true;
    } catch (const InfeasibleError &) {
        // some bin missed the truth; fall back to the maximally mixed state
        result.estimate = DensityMatrix::maximally_mixed(d);
        result.encoder_observed_success = false;
    }
    return result;
}

double max_constraint_violation(const Matrix &m, const std::vector<BinConstraint> &constraints) {
    double worst = 0;
    for (const BinConstraint &c : constraints) {
        double v = expectation(m, c.phi.amplitudes());
        worst = std::max({worst, c.lo - v, v - c.hi});
    }
    return worst;
}

DensityMatrix feasibility_solve(const std::vector<BinConstraint> &constraints, int d,
                                const FeasibilityOptions &options) {
    if (d < 2) {
        throw std::invalid_argument("feasibility_solve: dimension must be at least 2");
    }
    for (const BinConstraint &c : constraints) {
        if (c.phi.dim() != d) {
            throw std::invalid_argument("feasibility_solve: constraint vector has wrong dimension");
        }
        if (!(c.lo <= c.hi)) {
            throw InfeasibleError("feasibility_solve: constraint with lo > hi");
        }
    }
    const Matrix mixed = Matrix::Identity(d, d) / static_cast<double>(d);
    if (constraints.empty()) {
        return DensityMatrix(mixed);
    }
    check_obviously_infeasible(constraints);

    // Slab normals restricted to the trace-one plane: |phi><phi| - I/d, whose squared
    // Frobenius norm is 1 - 1/d.
    const double normal_sq = 1.0 - 1.0 / d;
    std::vector<Matrix> normals;
    normals.reserve(constraints.size());
    for (const BinConstraint &c : constraints) {
        normals.push_back(c.phi.projector() - mixed);
    }

    Matrix x = mixed;
    std::vector<Matrix> increments(constraints.size() + 1, Matrix::Zero(d, d));
    bool converged = max_constraint_violation(x, constraints) <= options.tolerance;
    for (int cycle = 0; cycle < options.max_cycles && !converged; ++cycle) {
        const Matrix previous = x;
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            Matrix y = x + increments[i];
            double v = expectation(y, constraints[i].phi.amplitudes());
            double target = std::clamp(v, constraints[i].lo, constraints[i].hi);
            x = y + ((target - v) / normal_sq) * normals[i];
            increments[i] = y - x;
        }
        Matrix y = x + increments.back();
        x = project_to_states(y);
        increments.back() = y - x;

        double violation = max_constraint_violation(x, constraints);
        if (violation <= options.tolerance) {
            converged = true;
            break;
        }
        if (cycle > 100 && (x - previous).norm() < 1e-15 && violation > kCertificateSlack) {
            throw InfeasibleError("feasibility_solve: projections stalled away from feasibility");
        }
    }
    if (!converged) {
        throw InfeasibleError("feasibility_solve: iteration budget exhausted");
    }

    x = (x + x.adjoint()) * 0.5;
    if (min_eigenvalue(x) < -kCertificatePsd ||
        std::abs(x.trace().real() - 1.0) > kCertificateTrace ||
        max_constraint_violation(x, constraints) > kCertificateSlack) {
        throw InfeasibleError("feasibility_solve: solution failed the post-hoc certificate");
    }
    return DensityMatrix(x);
}

double trace_norm_error_bound(double epsilon, int d) {
    if (!(epsilon >= 0)) {
        throw std::invalid_argument("trace_norm_error_bound: epsilon must be nonnegative");
    }
    return std::pow(static_cast<double>(d), 2.5) * epsilon;
}

nlohmann::json outcome_to_json(const GentleOutcome &o) {
    return {{"bin_index", o.bin_index},
            {"bin_lo", o.bin_lo},
            {"bin_hi", o.bin_hi},
            {"alpha_estimate", o.alpha_estimate},
            {"bin_probability", o.bin_probability},
            {"miss_probability", o.miss_probability},
            {"contains_truth", o.contains_truth},
            {"failure_class", std::string(to_string(o.failure_class))}};
}

nlohmann::json tomography_to_json(const TomographyResult &r) {
    nlohmann::json constraints = nlohmann::json::array();
    for (const BinConstraint &c : r.measurements.constraints) {
        nlohmann::json phi = nlohmann::json::array();
        for (Eigen::Index i = 0; i < c.phi.amplitudes().size(); ++i) {
            phi.push_back({c.phi.amplitudes()(i).real(), c.phi.amplitudes()(i).imag()});
        }
        constraints.push_back({{"lo", c.lo}, {"hi", c.hi}, {"phi", phi}});
    }
    nlohmann::json outcomes = nlohmann::json::array();
    for (const GentleOutcome &o : r.measurements.outcomes) {
        outcomes.push_back(outcome_to_json(o));
    }
    return {{"estimate", state_to_json(r.estimate)},
            {"constraints", constraints},
            {"outcomes", outcomes},
            {"declared_success", r.declared_success},
            {"encoder_observed_success", r.encoder_observed_success},
            {"epsilon", r.epsilon},
            {"trace_norm_bound", r.trace_norm_bound},
            {"fidelity_proxy", r.measurements.fidelity_proxy}};
}

}  // namespace gpress
