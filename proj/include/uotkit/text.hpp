#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uotkit::text {

/// Splits on LF, dropping a trailing CR from each line. A final newline does
/// not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view content);

std::string_view trim(std::string_view s);

/// Splits a record on commas or tabs (either, mixed allowed).
std::vector<std::string_view> split_fields(std::string_view line);

/// Strict decimal parse of the whole field (after trimming). Accepts "nan"/"inf"
/// spellings so that validation can report them instead of failing to parse.
std::optional<double> parse_double(std::string_view field);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string to_lower(std::string_view s);

}  // namespace uotkit::text
