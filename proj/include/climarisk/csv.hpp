#ifndef CLIMARISK_CSV_HPP
#define CLIMARISK_CSV_HPP

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "climarisk/error.hpp"

namespace climarisk {

// Fixed CSV dialect: comma separator, '.' decimal point, first column is the
// row id, mandatory header row. Lines starting with '#' are comments and are
// collected verbatim (the writers use them for metadata such as directions).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

} // namespace detail

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        if (line[0] == '#') {
            table.comments.push_back(line);
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            table.rows.push_back(std::move(fields));
        }
    }
    if (!have_header) throw Error(Errc::empty_panel, "CSV stream has no header row");
    return table;
}

/// Strict double parse; the whole field must be consumed.
inline std::optional<double> parse_double(std::string_view field) {
    if (field.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

/// Parses "0.25" or a fraction literal like "1/3".
inline std::optional<double> parse_number_or_fraction(std::string_view field) {
    const auto slash = field.find('/');
    if (slash == std::string_view::npos) return parse_double(field);
    const auto num = parse_double(detail::trim(field.substr(0, slash)));
    const auto den = parse_double(detail::trim(field.substr(slash + 1)));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
}

/// 17 significant digits: enough for exact double round-trips.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

} // namespace climarisk

#endif // CLIMARISK_CSV_HPP
