#pragma once

// Minimal static line plots: polylines over linear x and linear or log10 y.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "../io.hpp"

namespace lanczos_lab::harness {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

namespace detail {

inline std::string xml_escape(const std::string& s)
{
    std::string r;
    for (char c : s) {
        switch (c) {
        case '&': r += "&amp;"; break;
        case '<': r += "&lt;"; break;
        case '>': r += "&gt;"; break;
        case '"': r += "&quot;"; break;
        default: r += c;
        }
    }
    return r;
}

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

/** Writes one SVG document. With log_y, nonpositive samples are skipped. */
inline void write_svg(std::ostream& os, const std::string& title, const std::string& x_label,
                      const std::vector<Series>& series, bool log_y)
{
    constexpr double W = 720, H = 460, L = 80, R = 200, T = 40, B = 50;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double v) { return std::isfinite(v) && (!log_y || v > 0.0); };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
    }
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"24\" font-size=\"15\">" << detail::xml_escape(title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    // y ticks: integer decades on log scale, five even steps otherwise
    const int nticks = log_y ? static_cast<int>(ymax - ymin) : 5;
    const int step = std::max(1, nticks / 8);
    for (int i = 0; i <= nticks; i += step) {
        const double yv = ymin + (ymax - ymin) * i / nticks;
        const double y = py(yv);
        os << "<line x1=\"" << L - 4 << "\" y1=\"" << detail::num(y) << "\" x2=\"" << L << "\" y2=\"" << detail::num(y)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">"
           << (log_y ? "1e" + std::to_string(static_cast<int>(std::lround(yv))) : io::fmt(yv)) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5;
        const double x = px(xv);
        os << "<line x1=\"" << detail::num(x) << "\" y1=\"" << H - B << "\" x2=\"" << detail::num(x) << "\" y2=\""
           << H - B + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << detail::num(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
           << detail::num(xv) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
       << detail::xml_escape(x_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!usable(series[s].y[i])) continue;
            os << detail::num(px(series[s].x[i])) << ',' << detail::num(py(ty(series[s].y[i]))) << ' ';
        }
        os << "\"/>\n";
        const double ly = T + 16 + 18.0 * static_cast<double>(s);
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly << "\">" << detail::xml_escape(series[s].label)
           << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace lanczos_lab::harness
