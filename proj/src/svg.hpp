#ifndef PVLAB_SRC_SVG_HPP
#define PVLAB_SRC_SVG_HPP

#include <string>
#include <utility>
#include <vector>

namespace pvlab {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Static polyline plot. log_x draws the x axis in log10.
std::string render_svg(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<SvgSeries>& series,
                       bool log_x);

}  // namespace pvlab

#endif
