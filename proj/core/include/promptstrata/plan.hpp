#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptstrata/domain.hpp"
#include "promptstrata/prompts.hpp"

namespace promptstrata {

/// Image attribute a RecallTable can be grouped by.
enum class Axis : std::uint8_t { ImageIncomeClass, CountryWbClass, Continent, Country, CoarseIncome };

std::string_view to_string(Axis a);
std::optional<Axis> parse_axis(std::string_view s);

enum class Aggregation : std::uint8_t {
  Macro,  // unweighted mean over topics of per-topic group recall
  Micro,  // pooled: hits summed over topics / ground truth summed over topics
};

enum class GtScope : std::uint8_t {
  Pool,   // N = |GT|, grouping applied to the retrieved set afterwards
  Group,  // N = |GT ∩ group|, one prefix of the ranking per group
};

/// Which countries (or their native languages) a wildcard column draws from.
enum class CountryScope : std::uint8_t {
  Pool,      // countries with any image in the retrieval pool
  Filtered,  // countries with any image passing the plan's filter
};

/// One prompt column of a table, before wildcard expansion.
struct ColumnSpec {
  enum class Kind : std::uint8_t {
    Translated,        // fixed language list (empty = every native language in scope)
    NativeTranslated,  // language matched to the group's country
    CountrySuffix,     // suffix countries chosen by class / continent / list
    OwnCountrySuffix,  // suffix matched to the group's country
    IncomeSuffix,      // all synonyms of one category
  };

  Kind kind = Kind::Translated;
  std::string label;  // optional override for non-expanding columns
  std::vector<std::string> languages;
  std::vector<std::string> countries;
  std::optional<IncomeClass> wb_class;
  std::optional<Continent> continent;
  CountryScope scope = CountryScope::Pool;
  IncomeCategory category = IncomeCategory::Poor;
  /// Expand into one column per language / country instead of averaging.
  bool each = false;

  bool matched() const { return kind == Kind::NativeTranslated || kind == Kind::OwnCountrySuffix; }
};

struct ImageFilter {
  std::vector<IncomeClass> income_classes;  // empty = all
  std::vector<std::string> countries;       // empty = all
  bool require_major_language = false;
};

struct ExperimentPlan {
  std::string name;
  ImageFilter filter;
  std::vector<Axis> axes;
  std::vector<ColumnSpec> columns;  // the default-English baseline is implicit
  Aggregation aggregation = Aggregation::Macro;
  GtScope gt_scope = GtScope::Pool;
  std::vector<std::string> topics;  // empty = every non-subjective topic with images

  /// Throws InvalidPlan: duplicate axes, matched columns without a country
  /// axis, empty name, duplicate explicit labels.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentPlan from_json(const nlohmann::json& j);
};

/// Label of a non-expanding column, e.g. "translated:avg", "country:wb=Poor",
/// "income:poor"; the explicit label wins when set.
std::string column_label(const ColumnSpec& c);
/// Label of one member of an expanding column: "translated:<lang>" or
/// "country:<code>".
std::string expanded_label(const ColumnSpec& c, const std::string& member);

/// Label of the implicit baseline column.
inline constexpr std::string_view kBaselineLabel = "default";

enum class Preset : std::uint8_t { Rq1, Rq2, Rq3 };
std::optional<Preset> parse_preset(std::string_view s);
std::string_view to_string(Preset p);

/// The tables a preset evaluates (see README for their shapes).
std::vector<ExperimentPlan> preset_plans(Preset preset, Aggregation aggregation = Aggregation::Macro,
                                         GtScope gt_scope = GtScope::Pool);

}  // namespace promptstrata
