#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace promptstrata {

/// Four-level income scale. Used for both household-income quartiles and
/// World Bank country classes; ordered Poor < LowMid < UpMid < Rich.
enum class IncomeClass : std::uint8_t { Poor, LowMid, UpMid, Rich };

enum class Continent : std::uint8_t { Africa, America, Asia, Europe };

enum class CoarseIncome : std::uint8_t { Lower, Higher };

inline constexpr IncomeClass kIncomeClasses[] = {IncomeClass::Poor, IncomeClass::LowMid,
                                                 IncomeClass::UpMid, IncomeClass::Rich};
inline constexpr Continent kContinents[] = {Continent::Africa, Continent::America,
                                            Continent::Asia, Continent::Europe};

std::string_view to_string(IncomeClass c);
std::string_view to_string(Continent c);
std::string_view to_string(CoarseIncome c);

std::optional<IncomeClass> parse_income_class(std::string_view s);
std::optional<Continent> parse_continent(std::string_view s);
std::optional<CoarseIncome> parse_coarse_income(std::string_view s);

}  // namespace promptstrata
