#include "gpress/report.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gpress {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json num(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double num_or_nan(const nlohmann::json &j, const char *key) {
    const nlohmann::json &v = j.at(key);
    return v.is_null() ? kNaN : v.get<double>();
}

nlohmann::json failures_to_json(const FailureSummary &f) {
    return {{"too_close_boundary", f.too_close_boundary},
            {"no_nearby_boundary", f.no_nearby_boundary},
            {"wrong_bin", f.wrong_bin}};
}

FailureSummary failures_from_json(const nlohmann::json &j) {
    FailureSummary f;
    f.too_close_boundary = j.at("too_close_boundary").get<std::uint32_t>();
    f.no_nearby_boundary = j.at("no_nearby_boundary").get<std::uint32_t>();
    f.wrong_bin = j.at("wrong_bin").get<std::uint32_t>();
    return f;
}

nlohmann::json point_to_json(const PointSummary &p) {
    nlohmann::json j = {
        {"n", p.n},
        {"trials", p.trials},
        {"successes", p.successes},
        {"failure_fraction", num(p.failure_fraction)},
        {"failure_se", num(p.failure_se)},
        {"wrong_bin_fraction", num(p.wrong_bin_fraction)},
        {"first_failures", failures_to_json(p.first_failures)},
        {"solved", p.solved},
        {"infeasible", p.infeasible},
        {"mean_trace_distance", num(p.mean_trace_distance)},
        {"trace_distance_se", num(p.trace_distance_se)},
        {"bound_violations", p.bound_violations},
        {"max_bound_ratio", num(p.max_bound_ratio)},
        {"mean_fidelity_deficit", num(p.mean_fidelity_deficit)},
        {"entropy", num(p.entropy)},
        {"mean_expected_rate", num(p.mean_expected_rate)},
        {"expected_rate_se", num(p.expected_rate_se)},
        {"mean_payload_rate", num(p.mean_payload_rate)},
        {"mean_realized_rate", num(p.mean_realized_rate)},
        {"realized_rate_se", num(p.realized_rate_se)},
        {"mean_rate_gap", num(p.mean_rate_gap)},
        {"round_trip_failures", p.round_trip_failures},
    };
    nlohmann::json overflow = nlohmann::json::array();
    for (const OverflowRow &o : p.overflow) {
        overflow.push_back({{"rate", o.rate},
                            {"probability", num(o.probability)},
                            {"standard_error", num(o.standard_error)},
                            {"hits", o.hits},
                            {"importance_sampled", o.importance_sampled},
                            {"upper_bound_only", o.upper_bound_only},
                            {"upper_bound", num(o.upper_bound)},
                            {"rate_function", num(o.rate_function)}});
    }
    j["overflow"] = overflow;
    nlohmann::json exponent = nlohmann::json::array();
    for (const ExponentRow &e : p.exponent) {
        exponent.push_back({{"rate", e.rate}, {"exponent", num(e.exponent)}, {"certified", e.certified}});
    }
    j["exponent"] = exponent;
    return j;
}

PointSummary point_from_json(const nlohmann::json &j) {
    PointSummary p;
    p.n = j.at("n").get<std::uint64_t>();
    p.trials = j.at("trials").get<std::uint64_t>();
    p.successes = j.at("successes").get<std::uint64_t>();
    p.failure_fraction = num_or_nan(j, "failure_fraction");
    p.failure_se = num_or_nan(j, "failure_se");
    p.wrong_bin_fraction = num_or_nan(j, "wrong_bin_fraction");
    p.first_failures = failures_from_json(j.at("first_failures"));
    p.solved = j.at("solved").get<std::uint64_t>();
    p.infeasible = j.at("infeasible").get<std::uint64_t>();
    p.mean_trace_distance = num_or_nan(j, "mean_trace_distance");
    p.trace_distance_se = num_or_nan(j, "trace_distance_se");
    p.bound_violations = j.at("bound_violations").get<std::uint64_t>();
    p.max_bound_ratio = num_or_nan(j, "max_bound_ratio");
    p.mean_fidelity_deficit = num_or_nan(j, "mean_fidelity_deficit");
    p.entropy = num_or_nan(j, "entropy");
    p.mean_expected_rate = num_or_nan(j, "mean_expected_rate");
    p.expected_rate_se = num_or_nan(j, "expected_rate_se");
    p.mean_payload_rate = num_or_nan(j, "mean_payload_rate");
    p.mean_realized_rate = num_or_nan(j, "mean_realized_rate");
    p.realized_rate_se = num_or_nan(j, "realized_rate_se");
    p.mean_rate_gap = num_or_nan(j, "mean_rate_gap");
    p.round_trip_failures = j.at("round_trip_failures").get<std::uint64_t>();
    for (const nlohmann::json &o : j.at("overflow")) {
        OverflowRow row;
        row.rate = o.at("rate").get<double>();
        row.probability = num_or_nan(o, "probability");
        row.standard_error = num_or_nan(o, "standard_error");
        row.hits = o.at("hits").get<std::uint64_t>();
        row.importance_sampled = o.at("importance_sampled").get<bool>();
        row.upper_bound_only = o.at("upper_bound_only").get<bool>();
        row.upper_bound = num_or_nan(o, "upper_bound");
        row.rate_function = num_or_nan(o, "rate_function");
        p.overflow.push_back(row);
    }
    for (const nlohmann::json &e : j.at("exponent")) {
        p.exponent.push_back({e.at("rate").get<double>(), num_or_nan(e, "exponent"), e.at("certified").get<bool>()});
    }
    return p;
}

nlohmann::json fit_to_json(const SlopeFit &f) {
    return {{"quantity", f.quantity},
            {"x_axis", f.x_axis},
            {"slope", num(f.slope)},
            {"standard_error", num(f.standard_error)},
            {"intercept", num(f.intercept)},
            {"points", f.points},
            {"expected", f.expected ? num(*f.expected) : nlohmann::json(nullptr)},
            {"tolerance", f.tolerance},
            {"within", f.within}};
}

SlopeFit fit_from_json(const nlohmann::json &j) {
    SlopeFit f;
    f.quantity = j.at("quantity").get<std::string>();
    f.x_axis = j.at("x_axis").get<std::string>();
    f.slope = num_or_nan(j, "slope");
    f.standard_error = num_or_nan(j, "standard_error");
    f.intercept = num_or_nan(j, "intercept");
    f.points = j.at("points").get<std::size_t>();
    if (!j.at("expected").is_null()) {
        f.expected = j.at("expected").get<double>();
    }
    f.tolerance = j.at("tolerance").get<double>();
    f.within = j.at("within").get<bool>();
    return f;
}

std::string cell(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

struct Row {
    std::vector<std::string> cells;
};

Row base_row(const std::string &kind, const PointSummary &p) {
    Row r;
    r.cells = {kind,
               cell(p.n),
               "",
               cell(p.trials),
               cell(p.successes),
               cell(p.failure_fraction),
               cell(p.failure_se),
               cell(p.wrong_bin_fraction),
               cell(static_cast<std::uint64_t>(p.first_failures.too_close_boundary)),
               cell(static_cast<std::uint64_t>(p.first_failures.no_nearby_boundary)),
               cell(static_cast<std::uint64_t>(p.first_failures.wrong_bin)),
               cell(p.solved),
               cell(p.infeasible),
               cell(p.mean_trace_distance),
               cell(p.trace_distance_se),
               cell(p.bound_violations),
               cell(p.max_bound_ratio),
               cell(p.mean_fidelity_deficit),
               cell(p.entropy),
               cell(p.mean_expected_rate),
               cell(p.expected_rate_se),
               cell(p.mean_payload_rate),
               cell(p.mean_realized_rate),
               cell(p.realized_rate_se),
               cell(p.mean_rate_gap),
               cell(p.round_trip_failures),
               "", "", "", "", "", "", "", "", ""};
    return r;
}

}  // namespace

ReportFormat report_format_from_string(const std::string &name) {
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "json") {
        return ReportFormat::Json;
    }
    throw std::invalid_argument("unknown report format '" + name + "' (expected csv or json)");
}

nlohmann::json report_to_json(const Report &report) {
    nlohmann::json j;
    j["schema"] = report.schema;
    j["config"] = report.config;
    j["points"] = nlohmann::json::array();
    for (const PointSummary &p : report.points) {
        j["points"].push_back(point_to_json(p));
    }
    j["fits"] = nlohmann::json::array();
    for (const SlopeFit &f : report.fits) {
        j["fits"].push_back(fit_to_json(f));
    }
    j["checks"] = nlohmann::json::array();
    for (const Check &c : report.checks) {
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["disclosures"] = report.disclosures;
    j["trials"] = nlohmann::json::array();
    for (const TrialRecord &t : report.trials) {
        j["trials"].push_back(t.to_json());
    }
    j["threshold_exceeded"] = report.threshold_exceeded;
    return j;
}

Report report_from_json(const nlohmann::json &j) {
    Report r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != "gentle-press.report/1") {
        throw std::invalid_argument("unsupported report schema '" + r.schema + "'");
    }
    r.config = j.at("config");
    for (const nlohmann::json &p : j.at("points")) {
        r.points.push_back(point_from_json(p));
    }
    for (const nlohmann::json &f : j.at("fits")) {
        r.fits.push_back(fit_from_json(f));
    }
    for (const nlohmann::json &c : j.at("checks")) {
        r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                            c.at("detail").get<std::string>()});
    }
    r.disclosures = j.at("disclosures").get<std::vector<std::string>>();
    for (const nlohmann::json &t : j.at("trials")) {
        r.trials.push_back(TrialRecord::from_json(t));
    }
    r.threshold_exceeded = j.at("threshold_exceeded").get<bool>();
    return r;
}

const std::vector<std::string> &csv_columns() {
    static const std::vector<std::string> columns = {
        "kind", "n", "rate", "trials", "successes", "failure_fraction", "failure_se", "wrong_bin_fraction",
        "too_close_boundary", "no_nearby_boundary", "wrong_bin", "solved", "infeasible",
        "mean_trace_distance", "trace_distance_se", "bound_violations", "max_bound_ratio",
        "mean_fidelity_deficit", "entropy", "mean_expected_rate", "expected_rate_se", "mean_payload_rate",
        "mean_realized_rate", "realized_rate_se", "mean_rate_gap", "round_trip_failures",
        "overflow_probability", "overflow_se", "overflow_hits", "importance_sampled", "upper_bound_only",
        "upper_bound", "rate_function", "exponent", "certified"};
    return columns;
}

std::string report_to_csv(const Report &report) {
    const std::vector<std::string> &columns = csv_columns();
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    out += "\n";
    const std::string kind = report.config.is_object() ? report.config.value("kind", "") : "";
    std::vector<Row> rows;
    for (const PointSummary &p : report.points) {
        if (!p.overflow.empty()) {
            for (const OverflowRow &o : p.overflow) {
                Row r = base_row(kind, p);
                r.cells[2] = cell(o.rate);
                r.cells[26] = cell(o.probability);
                r.cells[27] = cell(o.standard_error);
                r.cells[28] = cell(o.hits);
                r.cells[29] = cell(o.importance_sampled);
                r.cells[30] = cell(o.upper_bound_only);
                r.cells[31] = cell(o.upper_bound);
                r.cells[32] = cell(o.rate_function);
                rows.push_back(r);
            }
        } else if (!p.exponent.empty()) {
            for (const ExponentRow &e : p.exponent) {
                Row r = base_row(kind, p);
                r.cells[2] = cell(e.rate);
                r.cells[33] = cell(e.exponent);
                r.cells[34] = cell(e.certified);
                rows.push_back(r);
            }
        } else {
            rows.push_back(base_row(kind, p));
        }
    }
    for (const Row &r : rows) {
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
            out += (i ? "," : "") + r.cells[i];
        }
        out += "\n";
    }
    return out;
}

std::string emit_report(const Report &report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        return report_to_csv(report);
    }
    return report_to_json(report).dump(2) + "\n";
}

void write_report(const Report &report, ReportFormat format, const std::string &path) {
    const std::string bytes = emit_report(report, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed for " + path + ": " + std::strerror(errno));
    }
}

}  // namespace gpress
