#pragma once

#include <string>
#include <vector>

namespace maskblur {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Writes a self-contained SVG line plot. Non-positive values are dropped on
/// logarithmic axes. Purely presentational output; never checksummed.
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options);

}  // namespace maskblur
