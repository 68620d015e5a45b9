#include "csv.hpp"

#include "promptstrata/error.hpp"

namespace promptstrata::csv {

std::vector<Row> parse(std::string_view text, const std::string& source) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_row = [&] {
    if (field_started || !row.empty()) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorKind::SchemaViolation, source + ": unterminated quoted field", source);
  }
  end_row();
  return rows;
}

void expect_header(const Row& header, const std::vector<std::string_view>& expected,
                   const std::string& source) {
  bool ok = header.size() == expected.size();
  for (std::size_t i = 0; ok && i < header.size(); ++i) ok = header[i] == expected[i];
  if (!ok) {
    std::string want;
    for (auto e : expected) {
      if (!want.empty()) want += ',';
      want += e;
    }
    throw Error(ErrorKind::SchemaViolation, source + ": expected header `" + want + "`", source);
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace promptstrata::csv
