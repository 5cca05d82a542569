#ifndef CLIMARISK_SVG_HPP
#define CLIMARISK_SVG_HPP

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climarisk/csv.hpp"

namespace climarisk {

// Minimal static SVG renderings for the batch outputs. Any viewer opens
// them; there is deliberately no styling knob surface.

namespace detail {

inline std::string svg_header(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           ' ' + std::to_string(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string svg_text(double x, double y, const std::string& text, int size = 12,
                            const char* anchor = "middle") {
    return "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" font-size=\"" +
           std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
           "\">" + text + "</text>\n";
}

} // namespace detail

inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, std::span<const double> xs,
                                  std::span<const double> ys,
                                  std::optional<double> y_marker = std::nullopt) {
    constexpr int width = 640, height = 420;
    constexpr double left = 70, right = 610, top = 50, bottom = 370;
    std::string out = detail::svg_header(width, height);
    out += detail::svg_text(width / 2.0, 24, title, 15);
    out += detail::svg_text((left + right) / 2.0, 408, x_label);
    out += "<g transform=\"rotate(-90 18 210)\">" +
           detail::svg_text(18, 210, y_label) + "</g>";

    double x_lo = xs.front(), x_hi = xs.back();
    double y_lo = ys[0], y_hi = ys[0];
    for (double y : ys) {
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    }
    if (y_marker) {
        y_lo = std::min(y_lo, *y_marker);
        y_hi = std::max(y_hi, *y_marker);
    }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_hi = y_lo + 1.0;

    auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (right - left); };
    auto py = [&](double y) { return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top); };

    out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(bottom) + "\" x2=\"" +
           format_double(right) + "\" y2=\"" + format_double(bottom) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
           format_double(left) + "\" y2=\"" + format_double(bottom) + "\" stroke=\"black\"/>\n";
    out += detail::svg_text(left, 388, format_double(x_lo));
    out += detail::svg_text(right, 388, format_double(x_hi));
    out += detail::svg_text(left - 8, bottom + 4, format_double(y_lo), 12, "end");
    out += detail::svg_text(left - 8, top + 4, format_double(y_hi), 12, "end");

    if (y_marker) {
        out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(py(*y_marker)) +
               "\" x2=\"" + format_double(right) + "\" y2=\"" + format_double(py(*y_marker)) +
               "\" stroke=\"#cc4444\" stroke-dasharray=\"6,4\"/>\n";
    }

    out += "<polyline fill=\"none\" stroke=\"#2266aa\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out.push_back(' ');
        out += format_double(px(xs[i])) + "," + format_double(py(ys[i]));
    }
    out += "\"/>\n</svg>\n";
    return out;
}

/// Bar chart with an optional overlay series drawn as diamond markers on
/// top of the bars (used for before/after comparisons).
inline std::string svg_bar_chart(const std::string& title,
                                 const std::vector<std::string>& labels,
                                 std::span<const double> values,
                                 std::optional<double> y_marker = std::nullopt,
                                 std::span<const double> overlay = {}) {
    constexpr int width = 720, height = 440;
    constexpr double left = 60, right = 700, top = 50, bottom = 340;
    std::string out = detail::svg_header(width, height);
    out += detail::svg_text(width / 2.0, 24, title, 15);

    double y_hi = 0.0;
    for (double v : values) y_hi = std::max(y_hi, v);
    for (double v : overlay) y_hi = std::max(y_hi, v);
    if (y_marker) y_hi = std::max(y_hi, *y_marker);
    if (y_hi <= 0.0) y_hi = 1.0;

    auto py = [&](double y) { return bottom - y / y_hi * (bottom - top); };
    const double slot = (right - left) / static_cast<double>(values.size());
    const double bar = slot * 0.7;

    out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(bottom) + "\" x2=\"" +
           format_double(right) + "\" y2=\"" + format_double(bottom) + "\" stroke=\"black\"/>\n";
    out += detail::svg_text(left - 8, bottom + 4, "0", 12, "end");
    out += detail::svg_text(left - 8, top + 4, format_double(y_hi), 12, "end");

    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = left + slot * (static_cast<double>(i) + 0.15);
        out += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(py(values[i])) +
               "\" width=\"" + format_double(bar) + "\" height=\"" +
               format_double(bottom - py(values[i])) + "\" fill=\"#4488bb\"/>\n";
        out += "<g transform=\"rotate(-45 " + format_double(x + bar / 2) + " " +
               format_double(bottom + 14) + ")\">" +
               detail::svg_text(x + bar / 2, bottom + 14, labels[i], 10, "end") + "</g>";
    }
    for (std::size_t i = 0; i < overlay.size() && i < values.size(); ++i) {
        const double cx = left + slot * (static_cast<double>(i) + 0.15) + bar / 2;
        const double cy = py(overlay[i]);
        out += "<path d=\"M " + format_double(cx - 5) + " " + format_double(cy) + " L " +
               format_double(cx) + " " + format_double(cy - 5) + " L " + format_double(cx + 5) +
               " " + format_double(cy) + " L " + format_double(cx) + " " + format_double(cy + 5) +
               " Z\" fill=\"#dd8822\"/>\n";
    }
    if (y_marker) {
        out += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(py(*y_marker)) +
               "\" x2=\"" + format_double(right) + "\" y2=\"" + format_double(py(*y_marker)) +
               "\" stroke=\"#cc4444\" stroke-dasharray=\"6,4\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace climarisk

#endif // CLIMARISK_SVG_HPP
