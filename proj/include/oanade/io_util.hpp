#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace oanade {

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Strict decimal parsers; throw InvalidArgument naming `what`.
std::size_t parse_size(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);

}  // namespace oanade
