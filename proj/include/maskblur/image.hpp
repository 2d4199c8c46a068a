#pragma once

#include <cstddef>
#include <vector>

#include "maskblur/errors.hpp"

namespace maskblur {

/// Row-major raster of doubles. Pixel (row, col) lives at values[row * width + col].
struct ImageGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    require(w >= 0 && h >= 0, ErrorCode::InvalidArgument, "image dimensions must be non-negative");
  }

  static ImageGrid zeros(int w, int h) { return ImageGrid(w, h, 0.0); }
  static ImageGrid constant(int w, int h, double v) { return ImageGrid(w, h, v); }

  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }

  std::size_t size() const { return values.size(); }
  bool same_shape(const ImageGrid& other) const {
    return width == other.width && height == other.height;
  }
  bool square() const { return width == height; }
};

double min_value(const ImageGrid& img);
double max_value(const ImageGrid& img);
double sum_values(const ImageGrid& img);

/// Mean over each factor x factor block; both dimensions must be divisible by factor.
ImageGrid block_mean_downscale(const ImageGrid& img, int factor);

/// Mean of absolute elementwise difference; shapes must match.
double max_abs_difference(const ImageGrid& a, const ImageGrid& b);

}  // namespace maskblur
