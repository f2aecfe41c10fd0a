#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gpress/harness.h"

namespace gpress {

enum class ReportFormat { Csv, Json };

ReportFormat report_format_from_string(const std::string &name);

nlohmann::json report_to_json(const Report &report);
Report report_from_json(const nlohmann::json &j);

/// Column names of the CSV form, in order.
const std::vector<std::string> &csv_columns();

/// One row per sweep point (per (n, R) pair for overflow and exponent sweeps). Reals are
/// printed with %.17g; missing values are empty cells.
std::string report_to_csv(const Report &report);

/// Deterministic serialization: identical reports give identical bytes.
std::string emit_report(const Report &report, ReportFormat format);

/// Writes emit_report(...) to path; throws std::runtime_error with the OS message on failure.
void write_report(const Report &report, ReportFormat format, const std::string &path);

}  // namespace gpress
