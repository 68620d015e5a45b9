#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>

#include "promptstrata/domain.hpp"
#include "promptstrata/ingest.hpp"

namespace promptstrata {

/// Upper-inclusive bin edges (USD/month) splitting incomes into four classes.
struct QuartileEdges {
  double e1{};
  double e2{};
  double e3{};

  friend bool operator==(const QuartileEdges&, const QuartileEdges&) = default;
};

enum class StratumKind : std::uint8_t { ImageIncomeClass, CountryWbClass, Continent, CoarseIncome };

/// A (kind, value) pair. `value` is the ordinal of IncomeClass, Continent or
/// CoarseIncome depending on `kind`.
class Stratum {
 public:
  static Stratum image_income(IncomeClass c) { return {StratumKind::ImageIncomeClass, static_cast<std::uint8_t>(c)}; }
  static Stratum country_wb(IncomeClass c) { return {StratumKind::CountryWbClass, static_cast<std::uint8_t>(c)}; }
  static Stratum continent(Continent c) { return {StratumKind::Continent, static_cast<std::uint8_t>(c)}; }
  static Stratum coarse(CoarseIncome c) { return {StratumKind::CoarseIncome, static_cast<std::uint8_t>(c)}; }

  StratumKind kind() const { return kind_; }
  std::uint8_t ordinal() const { return value_; }

  /// Throws WrongStratumKind when the kind does not carry that value type.
  IncomeClass income_class() const;
  Continent continent_value() const;
  CoarseIncome coarse_value() const;

  std::string_view label() const;

  friend bool operator==(const Stratum&, const Stratum&) = default;

 private:
  Stratum(StratumKind k, std::uint8_t v) : kind_(k), value_(v) {}
  StratumKind kind_;
  std::uint8_t value_;
};

/// Nearest-rank quartiles: e_k = sorted[ceil(k*n/4) - 1]. Throws TooFewValues
/// for fewer than four incomes and DegenerateEdges when ties make the edges
/// non-increasing.
QuartileEdges compute_quartile_edges(std::span<const double> incomes);

/// income <= e1 -> Poor, <= e2 -> LowMid, <= e3 -> UpMid, else Rich.
IncomeClass assign_income_class(double income, const QuartileEdges& edges);

/// Poor/LowMid -> Lower, UpMid/Rich -> Higher. Accepts ImageIncomeClass and
/// CountryWbClass strata only.
Stratum coarse_group(const Stratum& income_stratum);
CoarseIncome coarse_of(IncomeClass c);

/// (World Bank class, continent) for a country. Throws UnknownCountry.
std::pair<Stratum, Stratum> classify_country(const std::string& code, const CountryTable& countries);

/// Edges preset JSON: `{"e1": .., "e2": .., "e3": ..}`.
QuartileEdges load_edges(const std::filesystem::path& path);
QuartileEdges parse_edges(const std::string& json_text, const std::string& source);
void write_edges(const std::filesystem::path& path, const QuartileEdges& edges);

/// The Dollar Street preset shipped with the library (95.0 / 685.0 / 1998.0).
const QuartileEdges& dollar_street_edges();

}  // namespace promptstrata
