#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"

namespace gtsne {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

//! Self-contained line plot: one polyline per series, log-10 x axis,
//! each series min-max normalized on y (ranges are printed in the legend
//! so curves with different scales share one canvas).
inline std::string render_svg(const std::vector<Series>& series,
                              const std::string& x_label,
                              const std::string& y_label) {
  const double width = 960, height = 600;
  const double ml = 70, mr = 260, mt = 40, mb = 60;
  const double pw = width - ml - mr, ph = height - mt - mb;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf"};

  double x_min = 0.0, x_max = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.x) {
      require(v > 0.0, errc::invalid_input,
              "log-axis plot needs positive x values");
      double lg = std::log10(v);
      if (first) {
        x_min = x_max = lg;
        first = false;
      } else {
        x_min = std::min(x_min, lg);
        x_max = std::max(x_max, lg);
      }
    }
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }

  auto px = [&](double v) {
    return ml + pw * (std::log10(v) - x_min) / (x_max - x_min);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
         "height=\"600\" viewBox=\"0 0 960 600\">\n";
  svg += "<rect width=\"960\" height=\"600\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + format_sci(ml) + "\" y1=\"" + format_sci(mt + ph) +
         "\" x2=\"" + format_sci(ml + pw) + "\" y2=\"" + format_sci(mt + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_sci(ml) + "\" y1=\"" + format_sci(mt) +
         "\" x2=\"" + format_sci(ml) + "\" y2=\"" + format_sci(mt + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + format_sci(ml + pw / 2) + "\" y=\"" +
         format_sci(height - 15) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + x_label +
         " (log scale)</text>\n";
  svg += "<text x=\"20\" y=\"" + format_sci(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\" transform=\"rotate(-90 20 " +
         format_sci(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    double lg = x_min + (x_max - x_min) * t / ticks;
    double xx = ml + pw * t / ticks;
    svg += "<line x1=\"" + format_sci(xx) + "\" y1=\"" + format_sci(mt + ph) +
           "\" x2=\"" + format_sci(xx) + "\" y2=\"" +
           format_sci(mt + ph + 6) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_sci(xx) + "\" y=\"" +
           format_sci(mt + ph + 24) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"12\">" +
           format_sci(std::pow(10.0, lg)) + "</text>\n";
  }

  std::size_t idx = 0;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size() && !s.x.empty(), errc::invalid_input,
            "series needs matching nonempty x and y");
    double y_min = *std::min_element(s.y.begin(), s.y.end());
    double y_max = *std::max_element(s.y.begin(), s.y.end());
    double span = y_max - y_min;
    if (span < 1e-300) span = 1.0;
    const char* color = palette[idx % 7];
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      double yy = mt + ph * (1.0 - (s.y[k] - y_min) / span);
      pts += format_sci(px(s.x[k])) + "," + format_sci(yy) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    double ly = mt + 18.0 * static_cast<double>(idx) + 10.0;
    svg += "<rect x=\"" + format_sci(ml + pw + 12) + "\" y=\"" +
           format_sci(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" +
           color + "\"/>\n";
    svg += "<text x=\"" + format_sci(ml + pw + 30) + "\" y=\"" +
           format_sci(ly + 2) + "\" font-family=\"sans-serif\" "
           "font-size=\"12\">" + s.label + " [" + format_sci(y_min) + ", " +
           format_sci(y_max) + "]</text>\n";
    ++idx;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gtsne
