#pragma once

#include <string>
#include <vector>

namespace tabkit::app {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

/// Static SVG 1.1 polyline chart with axes, tick labels and a legend.
/// Non-finite points are skipped.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

/// Horizontal bars, one per label, in the given order.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

}  // namespace tabkit::app
