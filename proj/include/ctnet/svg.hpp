#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ctnet {

struct PlotLine {
  std::vector<double> x, y;
  std::string stroke = "#1f77b4";
  std::string label;
};

struct PlotBand {  // shaded region between lo(x) and hi(x)
  std::vector<double> x, lo, hi;
  std::string fill = "#1f77b4";
};

// Minimal self-contained SVG line plot with optional bands and shaded
// x-intervals (used to mark regions where a quantity is undefined).
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotBand>& bands, const std::vector<PlotLine>& lines,
                    const std::vector<std::pair<double, double>>& shade_x = {});

}  // namespace ctnet
