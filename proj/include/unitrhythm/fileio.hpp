#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace unitrhythm {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal representation that round-trips the double.
std::string format_double(double value);

/// Strict parse of a whole field; throws BadFormat with `context` otherwise.
double parse_double(std::string_view text, std::string_view context);
long long parse_int(std::string_view text, std::string_view context);

}  // namespace unitrhythm
