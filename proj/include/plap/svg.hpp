#pragma once

#include <string>
#include <vector>

namespace plap {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Dependency-free SVG line chart. Non-finite points are dropped; the y axis
/// switches to log10 when all values are positive and span more than two
/// decades.
std::string line_chart_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                           const std::vector<Series>& series);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace plap
