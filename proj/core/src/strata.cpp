#include "promptstrata/strata.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "bundled_data.hpp"
#include "io.hpp"
#include "promptstrata/error.hpp"

namespace promptstrata {

IncomeClass Stratum::income_class() const {
  if (kind_ != StratumKind::ImageIncomeClass && kind_ != StratumKind::CountryWbClass) {
    throw Error(ErrorKind::WrongStratumKind, "stratum does not carry an income class");
  }
  return static_cast<IncomeClass>(value_);
}

Continent Stratum::continent_value() const {
  if (kind_ != StratumKind::Continent) {
    throw Error(ErrorKind::WrongStratumKind, "stratum is not a continent");
  }
  return static_cast<Continent>(value_);
}

CoarseIncome Stratum::coarse_value() const {
  if (kind_ != StratumKind::CoarseIncome) {
    throw Error(ErrorKind::WrongStratumKind, "stratum is not a coarse income group");
  }
  return static_cast<CoarseIncome>(value_);
}

std::string_view Stratum::label() const {
  switch (kind_) {
    case StratumKind::ImageIncomeClass:
    case StratumKind::CountryWbClass:
      return to_string(static_cast<IncomeClass>(value_));
    case StratumKind::Continent:
      return to_string(static_cast<Continent>(value_));
    case StratumKind::CoarseIncome:
      return to_string(static_cast<CoarseIncome>(value_));
  }
  return "?";
}

QuartileEdges compute_quartile_edges(std::span<const double> incomes) {
  const std::size_t n = incomes.size();
  if (n < 4) {
    throw Error(ErrorKind::TooFewValues,
                "quartile edges need at least 4 incomes, got " + std::to_string(n));
  }
  std::vector<double> sorted(incomes.begin(), incomes.end());
  std::sort(sorted.begin(), sorted.end());
  // ceil(k*n/4) - 1 in integer arithmetic
  auto rank = [n](std::size_t k) { return (k * n + 3) / 4 - 1; };
  QuartileEdges edges{sorted[rank(1)], sorted[rank(2)], sorted[rank(3)]};
  if (!(edges.e1 < edges.e2 && edges.e2 < edges.e3)) {
    throw Error(ErrorKind::DegenerateEdges,
                "nearest-rank quartiles are not strictly increasing (" +
                    io::format_double(edges.e1) + ", " + io::format_double(edges.e2) + ", " +
                    io::format_double(edges.e3) + ")");
  }
  return edges;
}

IncomeClass assign_income_class(double income, const QuartileEdges& edges) {
  if (income <= edges.e1) return IncomeClass::Poor;
  if (income <= edges.e2) return IncomeClass::LowMid;
  if (income <= edges.e3) return IncomeClass::UpMid;
  return IncomeClass::Rich;
}

CoarseIncome coarse_of(IncomeClass c) {
  return (c == IncomeClass::Poor || c == IncomeClass::LowMid) ? CoarseIncome::Lower
                                                              : CoarseIncome::Higher;
}

Stratum coarse_group(const Stratum& income_stratum) {
  return Stratum::coarse(coarse_of(income_stratum.income_class()));
}

std::pair<Stratum, Stratum> classify_country(const std::string& code,
                                             const CountryTable& countries) {
  const auto& profile = countries.at(code);
  return {Stratum::country_wb(profile.wb_class), Stratum::continent(profile.continent)};
}

QuartileEdges parse_edges(const std::string& json_text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, source + ": invalid JSON: " + e.what(), source);
  }
  QuartileEdges edges;
  double* slots[] = {&edges.e1, &edges.e2, &edges.e3};
  const char* keys[] = {"e1", "e2", "e3"};
  for (int i = 0; i < 3; ++i) {
    if (!doc.is_object() || !doc.contains(keys[i]) || !doc[keys[i]].is_number()) {
      throw Error(ErrorKind::SchemaViolation,
                  source + ": field `" + keys[i] + "` missing or not a number", source);
    }
    *slots[i] = doc[keys[i]].get<double>();
  }
  if (!(edges.e1 > 0 && edges.e1 < edges.e2 && edges.e2 < edges.e3) || !std::isfinite(edges.e3)) {
    throw Error(ErrorKind::DegenerateEdges, source + ": edges must satisfy 0 < e1 < e2 < e3", source);
  }
  return edges;
}

QuartileEdges load_edges(const std::filesystem::path& path) {
  return parse_edges(io::read_file(path), path.string());
}

void write_edges(const std::filesystem::path& path, const QuartileEdges& edges) {
  nlohmann::json doc{{"e1", edges.e1}, {"e2", edges.e2}, {"e3", edges.e3}};
  io::write_file(path, doc.dump() + "\n");
}

const QuartileEdges& dollar_street_edges() {
  static const QuartileEdges edges =
      parse_edges(std::string(bundled::dollar_street_edges_json()), "<bundled edges>");
  return edges;
}

}  // namespace promptstrata
