#pragma once

// Small text and file helpers shared by the modules: RFC-4180 CSV,
// shortest round-trip number formatting, UTC timestamps.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wasubench {

using CsvRow = std::vector<std::string>;

/// Quotes `field` when it contains a comma, quote, CR or LF; quotes are doubled.
std::string csv_escape(std::string_view field);

/// Joins escaped fields with commas and terminates with `\n`.
std::string csv_line(const CsvRow& fields);

/// Parses RFC-4180 text (either `\n` or `\r\n` line endings). A trailing
/// newline does not produce an empty final row.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

std::string format_optional(const std::optional<double>& value);
std::string format_optional(const std::optional<std::int64_t>& value);
std::string format_optional(const std::optional<std::uint64_t>& value);

/// Whole-string decimal parse; nullopt on junk, trailing text or non-finite.
std::optional<double> parse_real(std::string_view text);

/// `2026-10-16T09:30:00.123Z`
std::string iso8601_utc(std::chrono::system_clock::time_point tp);

/// `20261016T093000Z`, safe for file names.
std::string compact_utc(std::chrono::system_clock::time_point tp);

std::string read_text_file(const std::filesystem::path& path);

/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace wasubench
