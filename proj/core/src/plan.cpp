#include "promptstrata/plan.hpp"

#include <algorithm>
#include <set>

#include "promptstrata/error.hpp"

namespace promptstrata {

namespace {

std::string_view family_name(ColumnSpec::Kind k) {
  switch (k) {
    case ColumnSpec::Kind::Translated: return "translated";
    case ColumnSpec::Kind::NativeTranslated: return "native";
    case ColumnSpec::Kind::CountrySuffix: return "country";
    case ColumnSpec::Kind::OwnCountrySuffix: return "own_country";
    case ColumnSpec::Kind::IncomeSuffix: return "income";
  }
  return "?";
}

std::optional<ColumnSpec::Kind> parse_family(std::string_view s) {
  for (auto k : {ColumnSpec::Kind::Translated, ColumnSpec::Kind::NativeTranslated,
                 ColumnSpec::Kind::CountrySuffix, ColumnSpec::Kind::OwnCountrySuffix,
                 ColumnSpec::Kind::IncomeSuffix}) {
    if (family_name(k) == s) return k;
  }
  return std::nullopt;
}

[[noreturn]] void plan_error(const std::string& what) {
  throw Error(ErrorKind::InvalidPlan, "invalid plan: " + what);
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) plan_error(std::string("`") + field + "` must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) plan_error(std::string("`") + field + "` must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

nlohmann::json column_to_json(const ColumnSpec& c) {
  nlohmann::json j;
  j["family"] = family_name(c.kind);
  if (!c.label.empty()) j["label"] = c.label;
  switch (c.kind) {
    case ColumnSpec::Kind::Translated:
      j["languages"] = c.languages;
      j["scope"] = c.scope == CountryScope::Pool ? "pool" : "filtered";
      j["each"] = c.each;
      break;
    case ColumnSpec::Kind::CountrySuffix:
      j["countries"] = c.countries;
      if (c.wb_class) j["wb_class"] = to_string(*c.wb_class);
      if (c.continent) j["continent"] = to_string(*c.continent);
      j["scope"] = c.scope == CountryScope::Pool ? "pool" : "filtered";
      j["each"] = c.each;
      break;
    case ColumnSpec::Kind::IncomeSuffix:
      j["category"] = to_string(c.category);
      break;
    case ColumnSpec::Kind::NativeTranslated:
    case ColumnSpec::Kind::OwnCountrySuffix:
      break;
  }
  return j;
}

ColumnSpec column_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    plan_error("every column needs a string `family`");
  }
  auto kind = parse_family(j["family"].get<std::string>());
  if (!kind) plan_error("unknown column family '" + j["family"].get<std::string>() + "'");
  ColumnSpec c;
  c.kind = *kind;
  if (j.contains("label")) {
    if (!j["label"].is_string()) plan_error("`label` must be a string");
    c.label = j["label"].get<std::string>();
  }
  if (j.contains("languages")) c.languages = string_list(j["languages"], "languages");
  if (j.contains("countries")) c.countries = string_list(j["countries"], "countries");
  if (j.contains("wb_class")) {
    auto v = j["wb_class"].is_string() ? parse_income_class(j["wb_class"].get<std::string>()) : std::nullopt;
    if (!v) plan_error("bad `wb_class`");
    c.wb_class = v;
  }
  if (j.contains("continent")) {
    auto v = j["continent"].is_string() ? parse_continent(j["continent"].get<std::string>()) : std::nullopt;
    if (!v) plan_error("bad `continent`");
    c.continent = v;
  }
  if (j.contains("scope")) {
    const auto s = j["scope"].is_string() ? j["scope"].get<std::string>() : "";
    if (s == "pool") c.scope = CountryScope::Pool;
    else if (s == "filtered") c.scope = CountryScope::Filtered;
    else plan_error("`scope` must be \"pool\" or \"filtered\"");
  }
  if (j.contains("category")) {
    auto v = j["category"].is_string() ? parse_income_category(j["category"].get<std::string>()) : std::nullopt;
    if (!v) plan_error("bad `category`");
    c.category = *v;
  } else if (c.kind == ColumnSpec::Kind::IncomeSuffix) {
    plan_error("income columns need a `category`");
  }
  if (j.contains("each")) {
    if (!j["each"].is_boolean()) plan_error("`each` must be a boolean");
    c.each = j["each"].get<bool>();
  }
  return c;
}

}  // namespace

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::ImageIncomeClass: return "image_income_class";
    case Axis::CountryWbClass: return "country_wb_class";
    case Axis::Continent: return "continent";
    case Axis::Country: return "country";
    case Axis::CoarseIncome: return "coarse_income";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view s) {
  for (auto a : {Axis::ImageIncomeClass, Axis::CountryWbClass, Axis::Continent, Axis::Country,
                 Axis::CoarseIncome}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

void ExperimentPlan::validate() const {
  if (name.empty()) plan_error("empty name");
  std::set<Axis> seen;
  for (auto a : axes) {
    if (!seen.insert(a).second) plan_error("axis '" + std::string(to_string(a)) + "' listed twice");
  }
  std::set<std::string> labels;
  for (const auto& c : columns) {
    if (c.matched() && !seen.count(Axis::Country)) {
      plan_error("column family '" + std::string(family_name(c.kind)) +
                 "' pairs prompts with the group's country and needs the `country` axis");
    }
    if (c.each && !c.label.empty()) plan_error("expanding columns cannot carry a fixed label");
    if (!c.label.empty()) {
      if (c.label == kBaselineLabel) plan_error("label 'default' is reserved for the baseline");
      if (!labels.insert(c.label).second) plan_error("duplicate column label '" + c.label + "'");
    }
  }
  std::set<std::string> topic_set(topics.begin(), topics.end());
  if (topic_set.size() != topics.size()) plan_error("duplicate topic ids");
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  nlohmann::json f;
  f["income_classes"] = nlohmann::json::array();
  for (auto c : filter.income_classes) f["income_classes"].push_back(to_string(c));
  f["countries"] = filter.countries;
  f["require_major_language"] = filter.require_major_language;
  j["filter"] = f;
  j["axes"] = nlohmann::json::array();
  for (auto a : axes) j["axes"].push_back(to_string(a));
  j["columns"] = nlohmann::json::array();
  for (const auto& c : columns) j["columns"].push_back(column_to_json(c));
  j["aggregation"] = aggregation == Aggregation::Macro ? "macro" : "micro";
  j["gt_scope"] = gt_scope == GtScope::Pool ? "pool" : "group";
  j["topics"] = topics;
  return j;
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) plan_error("expected a JSON object");
  ExperimentPlan p;
  if (!j.contains("name") || !j["name"].is_string()) plan_error("missing string `name`");
  p.name = j["name"].get<std::string>();
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    if (!f.is_object()) plan_error("`filter` must be an object");
    if (f.contains("income_classes")) {
      for (const auto& s : string_list(f["income_classes"], "income_classes")) {
        auto c = parse_income_class(s);
        if (!c) plan_error("unknown income class '" + s + "'");
        p.filter.income_classes.push_back(*c);
      }
    }
    if (f.contains("countries")) p.filter.countries = string_list(f["countries"], "countries");
    if (f.contains("require_major_language")) {
      if (!f["require_major_language"].is_boolean()) plan_error("`require_major_language` must be a boolean");
      p.filter.require_major_language = f["require_major_language"].get<bool>();
    }
  }
  if (j.contains("axes")) {
    for (const auto& s : string_list(j["axes"], "axes")) {
      auto a = parse_axis(s);
      if (!a) plan_error("unknown axis '" + s + "'");
      p.axes.push_back(*a);
    }
  }
  if (j.contains("columns")) {
    if (!j["columns"].is_array()) plan_error("`columns` must be an array");
    for (const auto& c : j["columns"]) p.columns.push_back(column_from_json(c));
  }
  if (j.contains("aggregation")) {
    const auto s = j["aggregation"].is_string() ? j["aggregation"].get<std::string>() : "";
    if (s == "macro") p.aggregation = Aggregation::Macro;
    else if (s == "micro") p.aggregation = Aggregation::Micro;
    else plan_error("`aggregation` must be \"macro\" or \"micro\"");
  }
  if (j.contains("gt_scope")) {
    const auto s = j["gt_scope"].is_string() ? j["gt_scope"].get<std::string>() : "";
    if (s == "pool") p.gt_scope = GtScope::Pool;
    else if (s == "group") p.gt_scope = GtScope::Group;
    else plan_error("`gt_scope` must be \"pool\" or \"group\"");
  }
  if (j.contains("topics")) p.topics = string_list(j["topics"], "topics");
  p.validate();
  return p;
}

std::string column_label(const ColumnSpec& c) {
  if (!c.label.empty()) return c.label;
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += '+';
      out += s;
    }
    return out;
  };
  switch (c.kind) {
    case ColumnSpec::Kind::Translated:
      return "translated:" + (c.languages.empty() ? std::string("avg") : join(c.languages));
    case ColumnSpec::Kind::NativeTranslated:
      return "native";
    case ColumnSpec::Kind::CountrySuffix: {
      std::string sel;
      if (c.wb_class) sel += "wb=" + std::string(to_string(*c.wb_class));
      if (c.continent) sel += (sel.empty() ? "" : ",") + std::string("continent=") + std::string(to_string(*c.continent));
      if (!c.countries.empty()) sel += (sel.empty() ? "" : ",") + join(c.countries);
      return "country:" + (sel.empty() ? std::string("avg") : sel);
    }
    case ColumnSpec::Kind::OwnCountrySuffix:
      return "country:own";
    case ColumnSpec::Kind::IncomeSuffix:
      return "income:" + std::string(to_string(c.category));
  }
  return "?";
}

std::string expanded_label(const ColumnSpec& c, const std::string& member) {
  return (c.kind == ColumnSpec::Kind::Translated ? "translated:" : "country:") + member;
}

std::optional<Preset> parse_preset(std::string_view s) {
  if (s == "rq1") return Preset::Rq1;
  if (s == "rq2") return Preset::Rq2;
  if (s == "rq3") return Preset::Rq3;
  return std::nullopt;
}

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::Rq1: return "rq1";
    case Preset::Rq2: return "rq2";
    case Preset::Rq3: return "rq3";
  }
  return "?";
}

std::vector<ExperimentPlan> preset_plans(Preset preset, Aggregation aggregation, GtScope gt_scope) {
  const ImageFilter lower{{IncomeClass::Poor, IncomeClass::LowMid}, {}, false};
  ImageFilter lower_native = lower;
  lower_native.require_major_language = true;

  auto make = [&](std::string name, ImageFilter filter, std::vector<Axis> axes,
                  std::vector<ColumnSpec> columns) {
    ExperimentPlan p;
    p.name = std::move(name);
    p.filter = std::move(filter);
    p.axes = std::move(axes);
    p.columns = std::move(columns);
    p.aggregation = aggregation;
    p.gt_scope = gt_scope;
    return p;
  };
  auto column = [](ColumnSpec::Kind kind) {
    ColumnSpec c;
    c.kind = kind;
    return c;
  };

  std::vector<ExperimentPlan> plans;
  switch (preset) {
    case Preset::Rq1: {
      // Native-language pairing per country on lower-income images.
      plans.push_back(make("rq1_native", lower_native, {Axis::Country},
                           {column(ColumnSpec::Kind::NativeTranslated)}));
      // Country x language heatmap.
      ColumnSpec each_filtered = column(ColumnSpec::Kind::Translated);
      each_filtered.scope = CountryScope::Filtered;
      each_filtered.each = true;
      plans.push_back(make("rq1_heatmap", lower_native, {Axis::Country}, {each_filtered}));
      // All images by income class: average over languages, then each language.
      ColumnSpec avg = column(ColumnSpec::Kind::Translated);
      ColumnSpec each = column(ColumnSpec::Kind::Translated);
      each.each = true;
      plans.push_back(make("rq1_income", {}, {Axis::ImageIncomeClass}, {avg, each}));
      break;
    }
    case Preset::Rq2: {
      std::vector<ColumnSpec> by_class;
      for (auto c : kIncomeClasses) {
        ColumnSpec s = column(ColumnSpec::Kind::CountrySuffix);
        s.wb_class = c;
        by_class.push_back(s);
      }
      plans.push_back(make("rq2_suffix_class", {}, {Axis::ImageIncomeClass}, by_class));
      plans.push_back(make("rq2_own_country", lower, {Axis::Country},
                           {column(ColumnSpec::Kind::OwnCountrySuffix)}));
      std::vector<ColumnSpec> by_continent;
      for (auto c : kContinents) {
        ColumnSpec s = column(ColumnSpec::Kind::CountrySuffix);
        s.continent = c;
        s.scope = CountryScope::Filtered;
        by_continent.push_back(s);
      }
      plans.push_back(make("rq2_continent", lower, {Axis::Continent, Axis::CountryWbClass},
                           by_continent));
      break;
    }
    case Preset::Rq3: {
      std::vector<ColumnSpec> income;
      for (auto c : {IncomeCategory::Poor, IncomeCategory::Rich, IncomeCategory::Neutral}) {
        ColumnSpec s = column(ColumnSpec::Kind::IncomeSuffix);
        s.category = c;
        income.push_back(s);
      }
      plans.push_back(make("rq3_income", {}, {Axis::ImageIncomeClass, Axis::CountryWbClass}, income));
      plans.push_back(make("rq3_country", lower, {Axis::Country}, income));
      break;
    }
  }
  return plans;
}

}  // namespace promptstrata
