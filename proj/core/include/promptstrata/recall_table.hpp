#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/plan.hpp"

namespace promptstrata {

/// One value per grouping axis, in the plan's axis order. Values are the
/// enum labels ("Poor", "Africa", "Lower") or the ISO country code.
using GroupKey = std::vector<std::pair<Axis, std::string>>;

struct RecallCell {
  GroupKey group;
  std::string prompt;        // column label; "default" for the baseline
  double recall = 0.0;       // in [0, 1]
  double delta = 0.0;        // recall - baseline recall on the same group and topics
  std::size_t topic_count = 0;

  friend bool operator==(const RecallCell&, const RecallCell&) = default;
};

struct RecallTable {
  nlohmann::json plan;               // ExperimentPlan::to_json() of the producing plan
  std::vector<std::string> columns;  // column labels in display order, baseline first
  std::vector<RecallCell> cells;

  /// Sorts cells by group (axis order, enum ordinal / code order) then by
  /// column position.
  void canonicalize();

  std::vector<Axis> axes() const;
  const RecallCell* find(const GroupKey& group, const std::string& prompt) const;
  /// Cells of one column.
  RecallTable column(const std::string& prompt) const;

  /// `{"plan": ..., "columns": [...], "groups": [{"axes", "prompt", "recall", "delta", "topic_count"}]}`
  nlohmann::json to_json() const;
  static RecallTable from_json(const nlohmann::json& j);
  /// Pretty-printed JSON plus trailing newline; byte-stable.
  std::string serialize() const;
};

/// Strict-weak order on group keys sharing one axis list.
bool group_less(const GroupKey& a, const GroupKey& b);

/// "Poor/CM" style rendering for tables.
std::string group_label(const GroupKey& g);

}  // namespace promptstrata
