#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "citeimpact/metrics/metrics.hpp"

namespace citeimpact {

enum class ReportFormat { markdown, csv, json };

/// Accepts md/markdown, csv and json.
ReportFormat report_format_from_string(std::string_view name);
std::string_view extension(ReportFormat format);

/// One results-table row: topology, modification (architecture and/or
/// imbalance strategy) and the evaluation behind it.
struct ReportRow {
  std::string topology;
  std::string modification;
  EvaluationReport report;
};

/// Table with per-class accuracy, micro-F1 and macro-F1 columns (percent, two
/// decimals; absent class accuracies print as "-"). Rows are sorted by
/// topology then modification. Throws PreconditionError for no rows or rows
/// over different label lists.
std::string render_report(std::vector<ReportRow> rows, ReportFormat format);

/// render_report written to `path`.
void emit_report(std::vector<ReportRow> rows, ReportFormat format,
                 const std::filesystem::path& path);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport evaluation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CvReport& report);

/// "%.2f" of value * 100.
std::string percent2(double value);

}  // namespace citeimpact
