#pragma once

#include <string_view>

namespace promptstrata::bundled {

std::string_view countries_csv();
std::string_view synonyms_json();
std::string_view dollar_street_edges_json();

}  // namespace promptstrata::bundled
