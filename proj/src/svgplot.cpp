#include "maskblur/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "maskblur/errors.hpp"
#include "maskblur/io.hpp"

namespace maskblur {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options) {
  require(!series.empty(), ErrorCode::InvalidArgument, "plot needs at least one series");

  const auto transform = [](double v, bool log_axis) {
    return log_axis ? std::log10(v) : v;
  };
  const auto usable = [&](double xx, double yy) {
    if (options.log_x && xx <= 0.0) return false;
    if (options.log_y && yy <= 0.0) return false;
    return std::isfinite(xx) && std::isfinite(yy);
  };

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool have = false;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      const double xx = transform(s.x[i], options.log_x);
      const double yy = transform(s.y[i], options.log_y);
      if (!have) {
        xmin = xmax = xx;
        ymin = ymax = yy;
        have = true;
      } else {
        xmin = std::min(xmin, xx);
        xmax = std::max(xmax, xx);
        ymin = std::min(ymin, yy);
        ymax = std::max(ymax, yy);
      }
    }
  }
  require(have, ErrorCode::InvalidArgument, "plot has no drawable points");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double xx) { return kMarginLeft + (xx - xmin) / (xmax - xmin) * plot_w; };
  const auto py = [&](double yy) {
    return kMarginTop + plot_h - (yy - ymin) / (ymax - ymin) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << options.title << "</text>\n";

  // Axes with four ticks per side.
  svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = xmin + (xmax - xmin) * i / 4.0;
    const double ty = ymin + (ymax - ymin) * i / 4.0;
    const double gx = px(tx);
    const double gy = py(ty);
    const double x_value = options.log_x ? std::pow(10.0, tx) : tx;
    const double y_value = options.log_y ? std::pow(10.0, ty) : ty;
    svg << "<line x1=\"" << gx << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\"" << gx
        << "\" y2=\"" << kMarginTop + plot_h + 5 << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << gx << "\" y=\"" << kMarginTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x_value)
        << "</text>\n";
    svg << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << gy << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << gy << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(y_value)
        << "</text>\n";
  }
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << options.x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
         "16 "
      << kMarginTop + plot_h / 2 << ")\">" << options.y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      svg << px(transform(s.x[i], options.log_x)) << "," << py(transform(s.y[i], options.log_y))
          << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kMarginLeft + plot_w - 6 << "\" y=\"" << kMarginTop + 16 + 16 * si
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace maskblur
