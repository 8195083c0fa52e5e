#pragma once

// Minimal comma-separated table reading/writing for the project's artifacts.
// Lines beginning with '#' are metadata comments; no quoting is supported
// because no artifact ever writes a comma inside a field.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdn::csv {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Table {
    std::vector<std::string> comments;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> lines;  // 1-based source line of each row

    std::size_t column(std::string_view name) const;  // throws ParseError if absent
    double number(std::size_t row, std::size_t col) const;
};

/// When `has_header` is false every non-comment line is a data row.
Table parse_table(std::string_view text, bool has_header = true);
Table read_table(const std::filesystem::path& path, bool has_header = true);

/// Parses a table into numeric rows; the first offending cell raises ParseError.
struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
NumericTable read_numeric(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line);
bool parse_double(std::string_view text, double& out) noexcept;

/// Fixed-point with `decimals` digits.
std::string fixed(double v, int decimals);
/// Shortest representation that round-trips (%.17g fallback), integers without exponent.
std::string format_number(double v);

}  // namespace pdn::csv
