#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spba {

// One polyline in data coordinates.
struct SvgSeries {
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  std::string label;
};

// Static line chart: bordered plot area, min/max tick labels, legend from the
// series labels. Well-formed standalone SVG.
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series, int width = 720,
                     int height = 420);

}  // namespace spba
