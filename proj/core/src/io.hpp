#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace promptstrata::io {

/// Reads a whole file; MissingFile if absent, IoFailure if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes, creating parent directories. IoFailure on error.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Parses a finite decimal number with dot separator; nullopt-like false on failure.
bool parse_double(std::string_view text, double& out);

}  // namespace promptstrata::io
