#pragma once

#include <string>
#include <vector>

namespace volcast::svg {

struct LineSeries {
    std::string label;
    std::string color;  // any SVG color string
    std::vector<double> y;
};

// Renders polyline charts over a shared x axis (0..n-1) with a light grid,
// axis labels and a legend. Emits deterministic text.
std::string line_chart(const std::string& title, const std::vector<LineSeries>& lines,
                       int width = 960, int height = 360);

void write_file(const std::string& path, const std::string& content);

}  // namespace volcast::svg
