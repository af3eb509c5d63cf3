#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sheetaudit/dependency_graph.hpp"
#include "sheetaudit/evaluator.hpp"
#include "sheetaudit/taxonomy.hpp"
#include "sheetaudit/workbook.hpp"

namespace sheetaudit {

enum class Severity { Info = 0, Warning = 1, Error = 2 };

std::string_view severity_name(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

struct Diagnostic {
    std::string detector;
    std::string taxonomy_leaf;
    std::vector<std::string> taxonomy_path;  // labels, root first
    Severity severity = Severity::Info;
    std::vector<CellAddress> cells;          // first entry is the cell the fix targets
    std::string message;
    std::optional<std::string> fix;

    bool operator==(const Diagnostic&) const = default;
};

namespace detector {
inline constexpr std::string_view kSyntax = "D-SYNTAX";
inline constexpr std::string_view kCirc = "D-CIRC";
inline constexpr std::string_view kHard = "D-HARD";
inline constexpr std::string_view kDupConst = "D-DUPCONST";
inline constexpr std::string_view kRangeFringe = "D-RANGE-FRINGE";
inline constexpr std::string_view kBlankRef = "D-BLANKREF";
inline constexpr std::string_view kInconsist = "D-INCONSIST";
inline constexpr std::string_view kSumWrap = "D-SUMWRAP";
inline constexpr std::string_view kFormat = "D-FORMAT";
inline constexpr std::string_view kCentury = "D-CENTURY";
inline constexpr std::string_view kStale = "D-STALE";
inline constexpr std::string_view kAvgParts = "D-AVGPARTS";
}  // namespace detector

const std::vector<std::string>& all_detector_ids();
bool is_detector_id(std::string_view id);

/// D-INCONSIST thresholds: a fill run needs at least this many formula cells,
/// and the majority shape must cover at least 2/3 of the run.
inline constexpr int kMinFillRun = 3;
inline constexpr int kMajorityNumerator = 2;
inline constexpr int kMajorityDenominator = 3;

/// Fill-run formulas are compared after rebasing to this mid-grid cell, so
/// relative references never leave the grid while being compared.
inline CellAddress shape_origin(std::string sheet) { return {std::move(sheet), kMaxColumn / 2, kMaxRow / 2}; }

struct DetectorConfig {
    int pivot_year = kDefaultPivotYear;
    int stale_days = 365;
    std::set<double> allowed_constants{0.0, 1.0, -1.0, 100.0};
    std::set<std::string, std::less<>> enabled;  // empty: all detectors
    std::optional<Date> analysis_date;            // default: today (UTC)

    bool is_enabled(std::string_view id) const;
};

/// Everything a detector reads. Built once per analysis.
struct AnalysisContext {
    const Workbook& workbook;
    const DepGraph& graph;
    const EvalResult& values;
    const DetectorConfig& config;
    const TaxonomyTree& taxonomy;
    Date analysis_date;
};

std::vector<Diagnostic> detect_syntax(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_circular(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_hard_coded(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_duplicated_constants(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_range_fringe(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_blank_refs(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_inconsistent(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_sum_wrap(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_format(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_century(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_stale(const AnalysisContext& ctx);
std::vector<Diagnostic> detect_average_parts(const AnalysisContext& ctx);

/// Runs the enabled detectors and sorts by (sheet, row, col, detector).
std::vector<Diagnostic> run_all(const Workbook& wb, const DetectorConfig& config);

/// Re-enters the fix text into the diagnostic's first cell. Returns nullopt
/// when the diagnostic has no fix.
std::optional<Workbook> apply_fix(const Workbook& wb, const Diagnostic& d, int pivot = kDefaultPivotYear);

/// Cell text for reports: unqualified for single-sheet workbooks.
std::string cell_label(const Workbook& wb, const CellAddress& a);

std::string diagnostics_to_json(const Workbook& wb, const std::vector<Diagnostic>& ds);
std::string diagnostics_to_text(const Workbook& wb, const std::vector<Diagnostic>& ds);

/// Candidate operands of a SUM or +/- chain formula, with their sign. Empty
/// when the formula is not of that shape. Shared with the injector.
struct FormatOperand {
    CellAddress cell;
    double sign = 1.0;
};
std::optional<std::vector<FormatOperand>> format_operands(const Expr& ast, const std::string& host_sheet,
                                                          const Workbook& wb);

/// The check D-FORMAT applies to one aggregate cell.
bool displayed_sum_mismatch(const Workbook& wb, const EvalResult& values, const CellAddress& aggregate,
                            const std::vector<FormatOperand>& operands);

}  // namespace sheetaudit
