#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace aquastream::csv {

// Splits one line on commas. No quoting support; the formats in this project
// carry only timestamps and numbers.
std::vector<std::string> split(std::string_view line);

// Strict finite-double parse. Throws Error(parse_error) on garbage,
// Error(non_finite_value) on inf/nan spellings.
double parse_value(std::string_view text);

// Shortest representation that round-trips the exact double.
std::string format_value(double v);

struct Row {
    std::size_t line_no; // 1-based, including header lines
    std::vector<std::string> fields;
};

// Reads all non-empty lines. When the first line contains any field that does
// not parse as a number or timestamp it is treated as a header and skipped.
std::vector<Row> read_file(const std::filesystem::path& path);

bool looks_like_header(const std::vector<std::string>& fields);

} // namespace aquastream::csv
