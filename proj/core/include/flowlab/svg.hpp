#pragma once

#include <string>
#include <utility>
#include <vector>

namespace flowlab {

struct PlotSeries {
  std::vector<double> x, y;
  std::string color{"#1f77b4"};
  std::string label;
};

// self-contained polyline chart (single fixed-size SVG, no external assets)
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series, bool log_x = false,
                     bool log_y = false);

struct RegionCell {
  double x, y, w, h;
  std::string color;
};

// filled cells (phase-diagram style) with optional boundary polylines
void write_svg_regions(const std::string& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<RegionCell>& cells,
                       const std::vector<PlotSeries>& boundaries,
                       const std::vector<std::pair<std::string, std::string>>& legend);

} // namespace flowlab
