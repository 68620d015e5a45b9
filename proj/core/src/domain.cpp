#include "promptstrata/domain.hpp"

namespace promptstrata {

std::string_view to_string(IncomeClass c) {
  switch (c) {
    case IncomeClass::Poor: return "Poor";
    case IncomeClass::LowMid: return "LowMid";
    case IncomeClass::UpMid: return "UpMid";
    case IncomeClass::Rich: return "Rich";
  }
  return "?";
}

std::string_view to_string(Continent c) {
  switch (c) {
    case Continent::Africa: return "Africa";
    case Continent::America: return "America";
    case Continent::Asia: return "Asia";
    case Continent::Europe: return "Europe";
  }
  return "?";
}

std::string_view to_string(CoarseIncome c) {
  return c == CoarseIncome::Lower ? "Lower" : "Higher";
}

std::optional<IncomeClass> parse_income_class(std::string_view s) {
  for (auto c : kIncomeClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<Continent> parse_continent(std::string_view s) {
  for (auto c : kContinents)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<CoarseIncome> parse_coarse_income(std::string_view s) {
  if (s == "Lower") return CoarseIncome::Lower;
  if (s == "Higher") return CoarseIncome::Higher;
  return std::nullopt;
}

}  // namespace promptstrata
