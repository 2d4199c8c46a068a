#include "maskblur/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace maskblur {

double min_value(const ImageGrid& img) {
  require(!img.values.empty(), ErrorCode::InvalidArgument, "empty image");
  return *std::min_element(img.values.begin(), img.values.end());
}

double max_value(const ImageGrid& img) {
  require(!img.values.empty(), ErrorCode::InvalidArgument, "empty image");
  return *std::max_element(img.values.begin(), img.values.end());
}

double sum_values(const ImageGrid& img) {
  double s = 0.0;
  for (double v : img.values) s += v;
  return s;
}

ImageGrid block_mean_downscale(const ImageGrid& img, int factor) {
  require(factor >= 1, ErrorCode::InvalidArgument, "downscale factor must be >= 1");
  require(img.width % factor == 0 && img.height % factor == 0, ErrorCode::NonIntegralDownscale,
          "image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
              " is not divisible by factor " + std::to_string(factor));
  ImageGrid out(img.width / factor, img.height / factor);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      double acc = 0.0;
      for (int dr = 0; dr < factor; ++dr)
        for (int dc = 0; dc < factor; ++dc) acc += img.at(r * factor + dr, c * factor + dc);
      out.at(r, c) = acc * inv;
    }
  }
  return out;
}

double max_abs_difference(const ImageGrid& a, const ImageGrid& b) {
  require(a.same_shape(b), ErrorCode::DimensionMismatch, "image shapes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace maskblur
