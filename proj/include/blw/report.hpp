#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blw/metrics.hpp"

namespace blw {

inline constexpr std::string_view kSummarySchema = "# blwbench-summary v1";
inline constexpr std::string_view kReferenceSchema = "# blwbench-reference v1";

struct ReportRow {
    std::string method;
    std::string label;
    /// Constant row carried from published results, not computed here.
    bool reference_only = false;
    std::size_t beats = 0;
    std::array<MetricStat, 4> stats{};
    std::array<std::optional<double>, 4> p_values{};
    std::optional<double> ms_per_beat;
};

/// One comparison: configuration echo plus one row per method.
struct ReportRun {
    std::string run_id;
    std::vector<std::pair<std::string, std::string>> echo;
    std::vector<ReportRow> rows;
};

struct ReportDocument {
    std::vector<ReportRun> runs;
};

/// Display name of a method key ("fir" -> "FIR Filter").
std::string method_label(std::string_view method);

/// Table order: classical filters, reference rows, ablation models, the
/// proposed model, then baselines; unknown keys sort last by name.
void sort_rows(std::vector<ReportRow>& rows);

ReportRow summary_row(const MethodSummary& s, std::size_t beats);

/// Reads the published baseline rows. FormatError on a schema mismatch or a
/// malformed line.
std::vector<ReportRow> parse_reference_rows(std::string_view text);

std::string format_summary_csv(const ReportDocument& doc);
/// FormatError on a missing or different schema line, or malformed rows.
ReportDocument parse_summary_csv(std::string_view text);
std::string format_markdown(const ReportDocument& doc);

/// Union of the runs of every input ordered by run id. The same id with
/// different content raises ConsistencyError.
ReportDocument merge_reports(const std::vector<ReportDocument>& inputs);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace blw
