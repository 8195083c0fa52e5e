#include "pdn/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "pdn/binary_io.hpp"

namespace pdn::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

bool parse_double(std::string_view text, double& out) noexcept {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError("missing column \"" + std::string(name) + "\"", 1);
}

double Table::number(std::size_t row, std::size_t col) const {
    const auto& r = cells.at(row);
    if (col >= r.size()) throw ParseError("missing field " + std::to_string(col + 1), lines.at(row));
    double v = 0.0;
    if (!parse_double(r[col], v)) {
        throw ParseError("field " + std::to_string(col + 1) + " is not a number: \"" + r[col] + "\"", lines.at(row));
    }
    return v;
}

Table parse_table(std::string_view text, bool has_header) {
    Table table;
    std::size_t line_no = 0;
    bool header_done = !has_header;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            table.comments.emplace_back(trim(line.substr(1)));
            continue;
        }
        if (!header_done) {
            table.header = split(line);
            header_done = true;
            continue;
        }
        table.cells.push_back(split(line));
        table.lines.push_back(line_no);
        if (has_header && table.cells.back().size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(table.cells.back().size()),
                             line_no);
        }
    }
    return table;
}

Table read_table(const std::filesystem::path& path, bool has_header) {
    const auto bytes = io::read_file(path);
    return parse_table(std::string_view(bytes.data(), bytes.size()), has_header);
}

NumericTable read_numeric(const std::filesystem::path& path) {
    const Table table = read_table(path);
    NumericTable out;
    out.header = table.header;
    out.rows.reserve(table.cells.size());
    for (std::size_t r = 0; r < table.cells.size(); ++r) {
        if (table.cells[r].size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(table.cells[r].size()),
                             table.lines[r]);
        }
        std::vector<double> row(table.cells[r].size());
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = table.number(r, c);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace pdn::csv
