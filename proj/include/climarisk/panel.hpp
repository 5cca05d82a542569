#ifndef CLIMARISK_PANEL_HPP
#define CLIMARISK_PANEL_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "climarisk/csv.hpp"
#include "climarisk/error.hpp"
#include "climarisk/matrix.hpp"

namespace climarisk {

/// Whether a larger raw value is better (positive) or worse (negative).
enum class Direction { positive, negative };

inline const char* direction_name(Direction d) {
    return d == Direction::positive ? "positive" : "negative";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "positive" || s == "pos" || s == "+") return Direction::positive;
    if (s == "negative" || s == "neg" || s == "-") return Direction::negative;
    return std::nullopt;
}

/// Rectangular year-by-indicator (or entity-by-indicator) table.
struct IndicatorPanel {
    std::vector<std::string> row_ids;
    std::vector<std::string> indicator_names;
    std::vector<Direction> directions;
    Matrix values; // n rows, m indicators

    std::size_t n() const { return values.rows(); }
    std::size_t m() const { return values.cols(); }

    std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t j = 0; j < indicator_names.size(); ++j)
            if (indicator_names[j] == name) return j;
        return std::nullopt;
    }
};

/// Min-max normalized panel. Keeps the source extremes so new observations
/// (e.g. scenario predictions) can be mapped into the same [0,1] frame.
struct NormalizedPanel {
    std::vector<std::string> row_ids;
    std::vector<std::string> indicator_names;
    std::vector<Direction> directions;
    Matrix values;
    std::vector<double> col_min; // raw extremes of the source panel
    std::vector<double> col_max;
    std::vector<bool> degenerate; // constant source column, see normalize()
    std::vector<std::string> warnings;

    std::size_t n() const { return values.rows(); }
    std::size_t m() const { return values.cols(); }

    std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t j = 0; j < indicator_names.size(); ++j)
            if (indicator_names[j] == name) return j;
        return std::nullopt;
    }

    /// Maps a raw value into column j's normalized frame using the recorded
    /// extremes, clamped to [0,1]. Sets *clamped when the clamp fired.
    double renormalize(std::size_t j, double raw, bool* clamped = nullptr) const {
        if (clamped) *clamped = false;
        if (degenerate[j]) return 0.5;
        const double span = col_max[j] - col_min[j];
        double v = directions[j] == Direction::positive ? (raw - col_min[j]) / span
                                                        : (col_max[j] - raw) / span;
        if (v < 0.0 || v > 1.0) {
            if (clamped) *clamped = true;
            v = v < 0.0 ? 0.0 : 1.0;
        }
        return v;
    }
};

/// Column means and per-cell deviations from them.
struct DeviationTable {
    std::vector<std::string> row_ids;
    std::vector<std::string> indicator_names;
    std::vector<double> means;
    Matrix deviations;
};

/// Relative profitability of an insurance book: (premium - payout) / premium.
/// Negative in loss years.
inline double net_premium_margin(double total_premium, double claim_payout) {
    if (!(total_premium > 0.0))
        throw Error(Errc::non_positive_premium,
                    "total premium must be > 0, got " + format_double(total_premium));
    return (total_premium - claim_payout) / total_premium;
}

struct PanelSchema {
    std::map<std::string, Direction, std::less<>> directions;
    // nullopt: every column must be assigned explicitly.
    std::optional<Direction> default_direction = Direction::positive;
};

/// Reads a panel from CSV. First column is the row id; every other column is
/// an indicator. Directions come from a "#direction:" comment line when
/// present, overridden by the schema, else the schema default.
inline IndicatorPanel load_panel(std::istream& in, const PanelSchema& schema = {}) {
    const CsvTable table = read_csv(in);
    if (table.header.size() < 2)
        throw Error(Errc::empty_panel, "panel needs an id column and at least one indicator");

    IndicatorPanel panel;
    panel.indicator_names.assign(table.header.begin() + 1, table.header.end());
    const std::size_t m = panel.indicator_names.size();

    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            if (panel.indicator_names[a] == panel.indicator_names[b])
                throw Error(Errc::duplicate_column,
                            "indicator column \"" + panel.indicator_names[a] + "\" appears twice");

    // Directions embedded by a previous write, e.g. "#direction: positive,negative".
    std::map<std::string, Direction, std::less<>> embedded;
    for (const auto& comment : table.comments) {
        constexpr std::string_view tag = "#direction:";
        if (comment.rfind(tag, 0) != 0) continue;
        auto fields = detail::split_csv_line(std::string_view(comment).substr(tag.size()));
        if (fields.size() != m)
            throw Error(Errc::direction_unassigned,
                        "#direction line has " + std::to_string(fields.size()) +
                            " entries for " + std::to_string(m) + " indicators");
        for (std::size_t j = 0; j < m; ++j) {
            const auto d = parse_direction(fields[j]);
            if (!d)
                throw Error(Errc::direction_unassigned,
                            "unknown direction \"" + fields[j] + "\" in #direction line");
            embedded[panel.indicator_names[j]] = *d;
        }
    }

    for (const auto& [name, dir] : schema.directions) {
        (void)dir;
        bool known = false;
        for (const auto& col : panel.indicator_names) known = known || col == name;
        if (!known)
            throw Error(Errc::direction_unassigned,
                        "schema assigns a direction to unknown column \"" + name + "\"");
    }

    panel.directions.resize(m, Direction::positive);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& name = panel.indicator_names[j];
        if (auto it = schema.directions.find(name); it != schema.directions.end()) {
            panel.directions[j] = it->second;
        } else if (auto em = embedded.find(name); em != embedded.end()) {
            panel.directions[j] = em->second;
        } else if (schema.default_direction) {
            panel.directions[j] = *schema.default_direction;
        } else {
            throw Error(Errc::direction_unassigned,
                        "no direction assigned for column \"" + name + "\"");
        }
    }

    panel.values = Matrix(table.rows.size(), m);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& fields = table.rows[i];
        if (fields.size() != m + 1)
            throw Error(Errc::missing_cell, "row " + std::to_string(i + 1) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(m + 1));
        if (fields[0].empty())
            throw Error(Errc::missing_cell, "empty row id at row " + std::to_string(i + 1));
        panel.row_ids.push_back(fields[0]);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& field = fields[j + 1];
            if (field.empty())
                throw Error(Errc::missing_cell, "empty cell at row " + std::to_string(i + 1) +
                                                    ", column \"" + panel.indicator_names[j] + "\"");
            const auto value = parse_double(field);
            if (!value || !std::isfinite(*value))
                throw Error(Errc::non_numeric, "cannot parse \"" + field + "\" at row " +
                                                   std::to_string(i + 1) + ", column \"" +
                                                   panel.indicator_names[j] + "\"");
            panel.values(i, j) = *value;
        }
    }
    return panel;
}

inline IndicatorPanel load_panel_file(const std::string& path, const PanelSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open \"" + path + "\"");
    return load_panel(in, schema);
}

/// Min-max normalization with per-column direction:
///   positive: (x - min) / (max - min)
///   negative: (max - x) / (max - min)
/// A constant column has no ranking information; it maps to 0.5 everywhere
/// and a DegenerateColumn warning is attached.
inline NormalizedPanel normalize(const IndicatorPanel& panel) {
    if (panel.n() == 0) throw Error(Errc::empty_panel, "cannot normalize an empty panel");
    NormalizedPanel out;
    out.row_ids = panel.row_ids;
    out.indicator_names = panel.indicator_names;
    out.directions = panel.directions;
    out.values = Matrix(panel.n(), panel.m());
    out.col_min.resize(panel.m());
    out.col_max.resize(panel.m());
    out.degenerate.assign(panel.m(), false);

    for (std::size_t j = 0; j < panel.m(); ++j) {
        double lo = panel.values(0, j), hi = panel.values(0, j);
        for (std::size_t i = 1; i < panel.n(); ++i) {
            lo = std::min(lo, panel.values(i, j));
            hi = std::max(hi, panel.values(i, j));
        }
        out.col_min[j] = lo;
        out.col_max[j] = hi;
        if (lo == hi) {
            out.degenerate[j] = true;
            out.warnings.push_back("DegenerateColumn: \"" + panel.indicator_names[j] +
                                   "\" is constant; normalized to 0.5");
            for (std::size_t i = 0; i < panel.n(); ++i) out.values(i, j) = 0.5;
            continue;
        }
        const double span = hi - lo;
        for (std::size_t i = 0; i < panel.n(); ++i) {
            const double x = panel.values(i, j);
            out.values(i, j) = panel.directions[j] == Direction::positive ? (x - lo) / span
                                                                          : (hi - x) / span;
        }
    }
    return out;
}

/// Column means and deviations from them. Column sums of the deviations
/// vanish up to rounding.
inline DeviationTable indicator_deviation(const IndicatorPanel& panel) {
    if (panel.n() == 0) throw Error(Errc::empty_panel, "cannot take deviations of an empty panel");
    DeviationTable out;
    out.row_ids = panel.row_ids;
    out.indicator_names = panel.indicator_names;
    out.means.resize(panel.m());
    out.deviations = Matrix(panel.n(), panel.m());
    for (std::size_t j = 0; j < panel.m(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < panel.n(); ++i) sum += panel.values(i, j);
        out.means[j] = sum / static_cast<double>(panel.n());
        for (std::size_t i = 0; i < panel.n(); ++i)
            out.deviations(i, j) = panel.values(i, j) - out.means[j];
    }
    return out;
}

namespace detail {

template <typename Panel>
void write_table(std::ostream& out, const Panel& panel, const Matrix& values) {
    std::vector<std::string> fields;
    fields.push_back("id");
    for (const auto& name : panel.indicator_names) fields.push_back(name);
    write_csv_row(out, fields);
    for (std::size_t i = 0; i < values.rows(); ++i) {
        fields.clear();
        fields.push_back(panel.row_ids[i]);
        for (std::size_t j = 0; j < values.cols(); ++j)
            fields.push_back(format_double(values(i, j)));
        write_csv_row(out, fields);
    }
}

} // namespace detail

inline void write_panel_csv(std::ostream& out, const NormalizedPanel& panel) {
    out << "#direction:";
    for (std::size_t j = 0; j < panel.m(); ++j)
        out << (j ? "," : " ") << direction_name(panel.directions[j]);
    out << '\n';
    detail::write_table(out, panel, panel.values);
}

inline void write_panel_csv(std::ostream& out, const IndicatorPanel& panel) {
    out << "#direction:";
    for (std::size_t j = 0; j < panel.m(); ++j)
        out << (j ? "," : " ") << direction_name(panel.directions[j]);
    out << '\n';
    detail::write_table(out, panel, panel.values);
}

inline void write_deviation_csv(std::ostream& out, const DeviationTable& table) {
    out << "#mean:";
    for (std::size_t j = 0; j < table.means.size(); ++j)
        out << (j ? "," : " ") << format_double(table.means[j]);
    out << '\n';
    detail::write_table(out, table, table.deviations);
}

} // namespace climarisk

#endif // CLIMARISK_PANEL_HPP
