#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gkdv {

struct PlotLine {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  bool log_x = true, log_y = true;
  std::vector<PlotLine> lines;
  int width = 640, height = 420;
};

// Static line plot; points that cannot be drawn on a log axis are dropped.
std::string render_svg(const PlotSpec& spec);

}  // namespace gkdv
