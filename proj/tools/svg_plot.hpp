#pragma once

// Minimal static SVG line charts for report figures. Deterministic output:
// no timestamps, fixed formatting, series drawn in input order.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svgplot {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y), plotted in order
};

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string escape(const std::string& text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

// Spread [lo, hi] slightly so flat data still draws mid-plot.
inline void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double bump = (lo == 0.0) ? 1.0 : std::abs(lo) * 0.1;
        lo -= bump;
        hi += bump;
    } else {
        const double bump = (hi - lo) * 0.05;
        lo -= bump;
        hi += bump;
    }
}

}  // namespace detail

/// Write a line chart with axes, ticks, and a legend. Throws when there is
/// nothing to plot or the file cannot be written.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
    std::size_t total_points = 0;
    for (const auto& s : series) total_points += s.points.size();
    if (total_points == 0) throw std::runtime_error("svg chart: no points to plot");

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    detail::pad_range(x_lo, x_hi);
    detail::pad_range(y_lo, y_hi);

    const double width = 640, height = 420;
    const double ml = 64, mr = 150, mt = 40, mb = 48;  // margins; right holds legend
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto sx = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    const auto sy = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const std::size_t n_colors = sizeof kColors / sizeof kColors[0];

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << (ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-size=\"14\">" << detail::escape(title) << "</text>\n";

    // Frame and ticks.
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / n_ticks;
        const double fy = y_lo + (y_hi - y_lo) * i / n_ticks;
        const double px = sx(fx), py = sy(fy);
        out << "<line x1=\"" << px << "\" y1=\"" << (mt + ph) << "\" x2=\"" << px << "\" y2=\""
            << (mt + ph + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << (mt + ph + 18)
            << "\" text-anchor=\"middle\">" << detail::fmt(fx) << "</text>\n";
        out << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
            << py << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << (ml - 8) << "\" y=\"" << (py + 4)
            << "\" text-anchor=\"end\">" << detail::fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << (ml + pw / 2) << "\" y=\"" << (height - 10)
        << "\" text-anchor=\"middle\">" << detail::escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + ph / 2) << "\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 16 " << (mt + ph / 2) << ")\">" << detail::escape(y_label)
        << "</text>\n";

    // Series polylines with point markers, then the legend.
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kColors[si % n_colors];
        if (series[si].points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
                << "points=\"";
            for (const auto& [x, y] : series[si].points) {
                out << detail::fmt(sx(x)) << "," << detail::fmt(sy(y)) << " ";
            }
            out << "\"/>\n";
        }
        for (const auto& [x, y] : series[si].points) {
            out << "<circle cx=\"" << detail::fmt(sx(x)) << "\" cy=\"" << detail::fmt(sy(y))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        const double ly = mt + 14 + 18 * static_cast<double>(si);
        out << "<line x1=\"" << (width - mr + 10) << "\" y1=\"" << ly << "\" x2=\""
            << (width - mr + 34) << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << (width - mr + 40) << "\" y=\"" << (ly + 4) << "\">"
            << detail::escape(series[si].label) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace svgplot
