#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/ingest.hpp"
#include "promptstrata/recall_table.hpp"
#include "promptstrata/stats.hpp"

namespace promptstrata {

enum class ReportFormat : std::uint8_t { Markdown, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string_view extension(ReportFormat f);

/// Where groups go in a Markdown grid.
enum class GridLayout : std::uint8_t {
  Auto,             // groups as columns for at most 8 groups and no country axis
  GroupsAsColumns,  // one row per prompt column
  GroupsAsRows,     // one row per group
};

/// "31.2 (+9.7)": recall and delta in percent, one decimal, signed delta.
std::string format_cell(double recall, double delta);
/// "31.2"
std::string format_percent(double value);

/// Markdown grids omit the baseline column (its delta is zero by definition).
/// Missing cells render as "-". Throws EmptyTable.
std::string render_table(const RecallTable& table, ReportFormat format,
                         GridLayout layout = GridLayout::Auto);

struct HeatmapMarker {
  std::optional<std::string> native;
  std::optional<std::string> best;
  bool both = false;  // native == best

  friend bool operator==(const HeatmapMarker&, const HeatmapMarker&) = default;
};

/// Country x language recall grid.
struct HeatmapMatrix {
  std::vector<std::string> rows;  // country codes
  std::vector<std::string> cols;  // language codes, ascending
  std::vector<std::vector<std::optional<double>>> values;
  std::map<std::string, HeatmapMarker> markers;

  /// best = row argmax over present values, ties to the lexicographically
  /// first column; native = the row's language when it is a column.
  void compute_markers(const std::map<std::string, std::string>& native_language);

  /// `{"rows", "cols", "values" (null when missing), "markers"}`
  nlohmann::json to_json() const;
};

/// Needs a table grouped by country alone with per-language translated
/// columns. Throws MissingAxis otherwise.
HeatmapMatrix build_heatmap(const RecallTable& table, const CountryTable& countries);

/// md marks best values with `**`, native with `_` (both: `**_v_**`).
std::string render_heatmap(const HeatmapMatrix& heatmap, ReportFormat format);

struct SignificanceRow {
  std::string plan;
  std::string intervention;  // column label tested against the baseline
  std::optional<WilcoxonResult> result;
  std::string note;  // reason when there is no result
};

std::string render_significance(const std::vector<SignificanceRow>& rows, ReportFormat format);

}  // namespace promptstrata
