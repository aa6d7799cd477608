#include "volcast/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "volcast/errors.hpp"

namespace volcast::svg {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<LineSeries>& lines,
                       int width, int height) {
    const double margin_left = 60, margin_right = 20, margin_top = 30, margin_bottom = 30;
    const double plot_w = width - margin_left - margin_right;
    const double plot_h = height - margin_top - margin_bottom;

    size_t n = 0;
    double y_min = 0.0, y_max = 1.0;
    bool have = false;
    for (const auto& line : lines) {
        n = std::max(n, line.y.size());
        for (double v : line.y) {
            if (!std::isfinite(v)) continue;
            if (!have) {
                y_min = y_max = v;
                have = true;
            } else {
                y_min = std::min(y_min, v);
                y_max = std::max(y_max, v);
            }
        }
    }
    if (!have || y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const auto sx = [&](size_t i) {
        return margin_left + (n <= 1 ? 0.0 : plot_w * static_cast<double>(i) / (n - 1));
    };
    const auto sy = [&](double v) {
        return margin_top + plot_h * (1.0 - (v - y_min) / (y_max - y_min));
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << margin_left << "\" y=\"20\" font-family=\"sans-serif\" "
          "font-size=\"14\">"
       << title << "</text>\n";

    for (int g = 0; g <= 4; ++g) {
        const double v = y_min + (y_max - y_min) * g / 4.0;
        const double y = sy(v);
        os << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(y) << "\" x2=\""
           << fmt(margin_left + plot_w) << "\" y2=\"" << fmt(y)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"4\" y=\"" << fmt(y + 4) << "\" font-family=\"sans-serif\" "
           << "font-size=\"11\">" << fmt(v) << "</text>\n";
    }

    for (const auto& line : lines) {
        os << "<polyline fill=\"none\" stroke=\"" << line.color
           << "\" stroke-width=\"1.2\" points=\"";
        for (size_t i = 0; i < line.y.size(); ++i) {
            if (!std::isfinite(line.y[i])) continue;
            os << fmt(sx(i)) << "," << fmt(sy(line.y[i])) << " ";
        }
        os << "\"/>\n";
    }

    double legend_x = margin_left + 8;
    for (const auto& line : lines) {
        os << "<rect x=\"" << fmt(legend_x) << "\" y=\"" << fmt(margin_top + 4)
           << "\" width=\"10\" height=\"10\" fill=\"" << line.color << "\"/>\n";
        os << "<text x=\"" << fmt(legend_x + 14) << "\" y=\"" << fmt(margin_top + 13)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << line.label << "</text>\n";
        legend_x += 14.0 + 7.0 * line.label.size() + 16.0;
    }

    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw DataError("svg: cannot open " + path + " for writing");
    os << content;
    if (!os) throw DataError("svg: write failed for " + path);
}

}  // namespace volcast::svg
