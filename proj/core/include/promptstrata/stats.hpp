#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/recall_table.hpp"

namespace promptstrata {

enum class WilcoxonMethod : std::uint8_t {
  Auto,  // exact for n_effective <= 25, normal approximation above
  ExactEnumeration,
  NormalApproximation,
};

std::string_view to_string(WilcoxonMethod m);

inline constexpr std::size_t kExactLimit = 25;
inline constexpr double kAlpha = 0.05;

struct WilcoxonResult {
  std::size_t n_effective = 0;  // pairs left after dropping zero differences
  double w_statistic = 0.0;     // min(T+, T-)
  double t_plus = 0.0;
  double t_minus = 0.0;
  double p_value = 1.0;         // two-sided
  bool significant = false;     // p_value <= 0.05
  WilcoxonMethod method = WilcoxonMethod::ExactEnumeration;

  /// `{"n", "w", "p", "significant", "method", "zero_handling"}`
  nlohmann::json to_json() const;
};

/// Two-sided signed-rank test on d_i = a_i - b_i. Zero differences are
/// dropped and tied |d| share their average rank. Exact p comes from the
/// full null distribution of T+; the normal approximation uses the tie and
/// continuity corrections.
///
/// Throws LengthMismatch, TooFewValues (fewer than two pairs) or
/// AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

struct DeltaRow {
  GroupKey group;
  double baseline = 0.0;
  double intervention = 0.0;
  double delta = 0.0;  // intervention - baseline
  char sign = '0';     // '+', '-' or '0'
};

/// Per-group difference of two single-column tables over identical groups.
/// Throws GroupMismatch when axes or group sets differ, or when a table has
/// more than one cell for a group.
std::vector<DeltaRow> delta_summary(const RecallTable& baseline, const RecallTable& intervention);

/// Recall pairs (baseline column, other column) over groups where both cells
/// exist, in canonical group order.
struct RecallPairs {
  std::vector<GroupKey> groups;
  std::vector<double> baseline;
  std::vector<double> intervention;
};
RecallPairs paired_recalls(const RecallTable& table, const std::string& intervention_label,
                           const std::string& baseline_label = std::string(kBaselineLabel));

}  // namespace promptstrata
