#pragma once

// Minimal RFC 4180 reader/writer for the metadata tables.

#include <string>
#include <string_view>
#include <vector>

namespace promptstrata::csv {

using Row = std::vector<std::string>;

/// Parses the whole document. Accepts CRLF line endings, a UTF-8 BOM and
/// quoted fields with doubled quotes. Blank lines are skipped. Throws
/// SchemaViolation on an unterminated quote.
std::vector<Row> parse(std::string_view text, const std::string& source);

/// Checks that `header` equals `expected` exactly.
void expect_header(const Row& header, const std::vector<std::string_view>& expected,
                   const std::string& source);

std::string escape(std::string_view field);

}  // namespace promptstrata::csv
