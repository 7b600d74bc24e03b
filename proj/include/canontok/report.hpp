#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "canontok/analysis.hpp"

namespace canontok {

enum class ReportFormat { csv, json };

// Throws ValidationError for anything but "csv" or "json".
ReportFormat parse_report_format(std::string_view name);

// CSV: the per-prompt table, a blank line, the per-string table, a blank
// line, then metric,value rows for every estimate that is defined. JSON
// mirrors it as {"prompts", "strings", "summary"} with the same names.
// Output is a pure function of the report.
std::string format_report(const MultiplicityReport& report, ReportFormat format);

// Throws Error when the path cannot be written.
void emit_report(const MultiplicityReport& report, ReportFormat format,
                 const std::filesystem::path& path);

// Shortest decimal that round-trips.
std::string format_number(double value);

}  // namespace canontok
