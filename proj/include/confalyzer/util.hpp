#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace confalyzer {

// UTC timestamp with millisecond precision, e.g. "2026-10-15T09:12:44.123Z".
std::string utc_now_iso8601();

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// ceil(a / b) for positive integers.
constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace confalyzer
