#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tdfdr/harness.hpp"

namespace tdfdr {

enum class ReportFormat { Tsv, Json, Markdown };

ReportFormat parse_report_format(std::string_view name);
std::string_view file_extension(ReportFormat f) noexcept;

std::string render_report(const ExperimentSummary& summary, ReportFormat format);

/// Writes the report to `path`; throws IoError naming the path on failure.
void emit_report(const ExperimentSummary& summary, ReportFormat format, const std::filesystem::path& path);

/// One line of the TSV summary table.
struct SummaryRow {
    std::string method;
    double alpha = 0.0;
    double mean_fdp = 0.0;
    double fdp_se = 0.0;
    double mean_rejections = 0.0;
    double mean_true_rejections = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    bool starred = false;
};

std::vector<SummaryRow> summary_rows(const ExperimentSummary& summary);
std::string render_summary_tsv(const std::vector<SummaryRow>& rows);
/// Throws DataError on malformed input.
std::vector<SummaryRow> parse_summary_tsv(std::string_view text);

/// Inverse of the JSON report (spec, cells and per-replicate vectors).
ExperimentSummary summary_from_json(std::string_view text);

}  // namespace tdfdr
