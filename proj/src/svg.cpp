#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pvlab {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<SvgSeries>& series,
                       bool log_x) {
  const double W = 760, H = 480;
  const double ml = 70, mr = 20, mt = 36, mb = 50;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (log_x) {
        if (!(x > 0.0)) continue;
        x = std::log10(x);
      }
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto X = [&](double x) {
    if (log_x) x = std::log10(std::max(x, 1e-300));
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto Y = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";

  // frame and ticks
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
     << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double px = ml + (W - ml - mr) * i / 5.0;
    os << "<line x1=\"" << px << "\" y1=\"" << H - mb << "\" x2=\"" << px << "\" y2=\""
       << H - mb + 5 << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">"
       << (log_x ? ("1e" + fmt(fx)) : fmt(fx)) << "</text>\n";
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    const double py = H - mb - (H - mt - mb) * i / 5.0;
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
       << py << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";

  std::size_t ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::ostringstream pts;
    for (auto [x, y] : s.points) {
      if (log_x && !(x > 0.0)) continue;
      pts << fmt(X(x)) << "," << fmt(Y(y)) << " ";
    }
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.4\"/>\n";
    if (series.size() <= 8) {
      os << "<text x=\"" << W - mr - 6 << "\" y=\"" << mt + 16 + 14 * ci
         << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">"
         << s.label << "</text>\n";
    }
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pvlab
