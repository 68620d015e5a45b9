#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/dataset.hpp"
#include "promptstrata/engine.hpp"
#include "promptstrata/plan.hpp"
#include "promptstrata/recall_table.hpp"
#include "promptstrata/report.hpp"

namespace promptstrata {

/// Inputs and settings of one `eval` invocation.
struct RunConfig {
  DataLayout layout;
  LoadOptions load;
  std::vector<ExperimentPlan> plans;
  std::filesystem::path out_dir;
  std::size_t workers = 1;
  std::vector<ReportFormat> formats{ReportFormat::Json, ReportFormat::Markdown, ReportFormat::Csv};
  /// Additional input files hashed into the manifest, keyed by role.
  std::map<std::string, std::filesystem::path> extra_inputs;
  /// How the edges were chosen, recorded in the manifest.
  std::string edges_source = "computed";
};

struct RunOutcome {
  std::vector<RecallTable> tables;
  std::vector<SignificanceRow> significance;
  std::vector<std::filesystem::path> artifacts;  // relative to out_dir, sorted
};

/// Loads the data, evaluates every plan and writes
///   tables/<plan>.{json,md,csv}
///   heatmaps/<plan>.{json,md,csv}  for country x language tables
///   stats.json, stats.md           Wilcoxon tests on per-country tables
///   report.md                      every Markdown table in plan order
///   manifest.json                  input and output hashes, settings
/// No artifact depends on the worker count.
RunOutcome run_eval(const RunConfig& config);

/// Wilcoxon tests of every non-baseline column against the baseline, one
/// pair per group, for tables grouped by country alone.
std::vector<SignificanceRow> significance_tests(const std::vector<RecallTable>& tables);

/// Checks whatever files of the layout exist and returns a summary with
/// counts and warnings. Missing metadata files raise MissingFile.
nlohmann::json validate_layout(const DataLayout& layout);

/// Hash manifest of a run: inputs by role, synonym-set hash, settings and
/// output hashes. Paths are recorded by file name only.
nlohmann::json build_manifest(const RunConfig& config, const Dataset& data,
                              const std::vector<std::filesystem::path>& outputs);

}  // namespace promptstrata
