#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpress/gentle.h"
#include "gpress/qmath.h"

namespace gpress {

class Rng;

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { FailureScaling, EstimateScaling, RateConvergence, Overflow, Exponent };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string &name);

/// delta = n^(-s) unless a fixed value is given.
struct DeltaRule {
    std::optional<double> fixed;
    double operator()(std::uint64_t n, double s) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::FailureScaling;
    int d = 2;
    nlohmann::json state;  // {"bloch": [...]}, {"diagonal": [...]} or {"random_seed": u64}
    std::vector<std::uint64_t> n;
    double s = 0.2;
    DeltaRule delta;
    int precision = 32;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<double> rates;       // overflow and exponent kinds
    bool exact_model = false;        // overflow kind: model from rho itself instead of tomography
    std::optional<double> max_failed_fraction;
    bool record_trials = false;
    double slope_tolerance = 0.15;

    static ExperimentConfig from_json(const nlohmann::json &j);
    nlohmann::json to_json() const;
    void validate() const;
    DensityMatrix source_state() const;
};

/// Number of trials whose gentle measurements landed in each class. A trial counts
/// toward the first failing block's class; successes have every block Success.
struct FailureSummary {
    std::uint32_t too_close_boundary = 0;
    std::uint32_t no_nearby_boundary = 0;
    std::uint32_t wrong_bin = 0;
};

struct TrialRecord {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    std::uint64_t n = 0;
    bool declared_success = false;
    bool all_contain_truth = false;
    FailureClass first_failure = FailureClass::Success;
    FailureSummary block_failures;  // per-block class counts within this trial
    bool solved = false;            // estimation attempted
    bool infeasible = false;        // solver found no consistent state; I/d used instead
    double epsilon = 0;
    double trace_distance = 0;      // ||rho - rho_tilde||_1 (NaN when not solved)
    double trace_norm_bound = 0;
    double delta = 0;
    double entropy = 0;             // S(rho_true)
    double expected_rate = 0;
    std::uint64_t payload_bits = 0;
    std::uint64_t blob_bits = 0;
    bool round_trip_ok = false;
    double fidelity_proxy = 1;
    double fidelity_deficit = 0;

    nlohmann::json to_json() const;
    static TrialRecord from_json(const nlohmann::json &j);
};

/// Tomography, regularization, quantization, symbol sampling, encode, serialize, parse,
/// decode, and verification for one trial. An infeasible solve is recorded (infeasible =
/// true, declared_success unchanged) and the pipeline continues with I/d as estimate.
TrialRecord run_pipeline(const DensityMatrix &rho_true, std::uint64_t n, double s, double delta,
                         int precision, Rng &rng);

struct OverflowRow {
    double rate = 0;
    double probability = 0;
    double standard_error = 0;
    std::uint64_t hits = 0;
    bool importance_sampled = false;
    bool upper_bound_only = false;
    double upper_bound = 1;
    double rate_function = 0;  // Cramer oracle for the fixed model (bits)
};

struct ExponentRow {
    double rate = 0;
    double exponent = 0;
    bool certified = false;
};

struct PointSummary {
    std::uint64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double failure_fraction = 0;
    double failure_se = 0;
    double wrong_bin_fraction = 0;  // trials with some block outside its true bin
    FailureSummary first_failures;
    std::uint64_t solved = 0;
    std::uint64_t infeasible = 0;
    double mean_trace_distance = 0;
    double trace_distance_se = 0;
    std::uint64_t bound_violations = 0;
    double max_bound_ratio = 0;
    double mean_fidelity_deficit = 0;
    double entropy = 0;
    double mean_expected_rate = 0;
    double expected_rate_se = 0;
    double mean_payload_rate = 0;  // payload bits / n
    double mean_realized_rate = 0; // total blob bits / n
    double realized_rate_se = 0;
    double mean_rate_gap = 0;      // realized rate - S(rho)
    std::uint64_t round_trip_failures = 0;
    std::vector<OverflowRow> overflow;
    std::vector<ExponentRow> exponent;
};

struct SlopeFit {
    std::string quantity;
    std::string x_axis;  // "log n" or "n"
    double slope = 0;
    double standard_error = 0;
    double intercept = 0;
    std::size_t points = 0;
    std::optional<double> expected;
    double tolerance = 0;
    bool within = false;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::string schema = "gentle-press.report/1";
    nlohmann::json config;
    std::vector<PointSummary> points;
    std::vector<SlopeFit> fits;
    std::vector<Check> checks;
    std::vector<std::string> disclosures;
    std::vector<TrialRecord> trials;  // only when record_trials is set
    bool threshold_exceeded = false;
};

/// Least-squares line through (x, y) with the slope's standard error.
SlopeFit fit_line(const std::vector<double> &x, const std::vector<double> &y);

/// Runs the sweep. Trial t at point p draws from derive_seed(seed, p, t); trials run on
/// `parallel` threads and are aggregated in index order, so output does not depend on
/// the thread count.
Report run_sweep(const ExperimentConfig &cfg, int parallel = 1);

}  // namespace gpress
