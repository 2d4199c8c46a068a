#include "maskblur/kernel.hpp"

#include <cmath>
#include <cstdio>

namespace maskblur {

namespace {

// Fraction of each scene cell covered by the disk (optionally gated by a 2x2
// quadrant code), estimated with a dense midpoint grid per cell. 128 samples
// per axis keeps the area error well below 1e-4 of a cell.
ImageGrid rasterize_disk(double radius_scene_px, bool coded) {
  constexpr int kSamplesPerAxis = 128;
  int side = static_cast<int>(std::ceil(2.0 * radius_scene_px));
  if (side % 2 == 0) side += 1;
  if (side < 1) side = 1;
  const int half = side / 2;

  ImageGrid raster(side, side);
  const double step = 1.0 / kSamplesPerAxis;
  const double r2 = radius_scene_px * radius_scene_px;
  for (int cy = -half; cy <= half; ++cy) {
    for (int cx = -half; cx <= half; ++cx) {
      long long hits = 0;
      for (int sy = 0; sy < kSamplesPerAxis; ++sy) {
        const double y = cy - 0.5 + (sy + 0.5) * step;
        for (int sx = 0; sx < kSamplesPerAxis; ++sx) {
          const double x = cx - 0.5 + (sx + 0.5) * step;
          if (x * x + y * y > r2) continue;
          if (coded) {
            // Diagonal quadrant code: keep quadrants where sign(x) == sign(y).
            const bool qx = x >= 0.0;
            const bool qy = y >= 0.0;
            if (qx != qy) continue;
          }
          ++hits;
        }
      }
      raster.at(cy + half, cx + half) =
          static_cast<double>(hits) / (static_cast<double>(kSamplesPerAxis) * kSamplesPerAxis);
    }
  }
  return raster;
}

void normalize_unit_sum(ImageGrid& raster) {
  const double total = sum_values(raster);
  require(total > 0.0, ErrorCode::InvalidArgument, "kernel raster has zero mass");
  for (double& v : raster.values) v /= total;
}

std::string format_diameter(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", d);
  return buf;
}

}  // namespace

BlurKernel make_in_focus() {
  BlurKernel k;
  k.kind = KernelKind::InFocus;
  k.name = "infocus";
  k.diameter_sensor_px = 0.0;
  k.raster = ImageGrid(1, 1, 1.0);
  return k;
}

BlurKernel make_disk(double diameter_sensor_px, int sensor_block) {
  require(diameter_sensor_px > 0.0, ErrorCode::InvalidArgument, "disk diameter must be positive");
  require(sensor_block >= 1, ErrorCode::InvalidArgument, "sensor_block must be >= 1");
  BlurKernel k;
  k.kind = KernelKind::Disk;
  k.name = "disk-" + format_diameter(diameter_sensor_px);
  k.diameter_sensor_px = diameter_sensor_px;
  k.raster = rasterize_disk(0.5 * diameter_sensor_px * sensor_block, /*coded=*/false);
  normalize_unit_sum(k.raster);
  return k;
}

BlurKernel make_coded_quadrant(double diameter_sensor_px, int sensor_block) {
  require(diameter_sensor_px > 0.0, ErrorCode::InvalidArgument, "disk diameter must be positive");
  require(sensor_block >= 1, ErrorCode::InvalidArgument, "sensor_block must be >= 1");
  BlurKernel k;
  k.kind = KernelKind::Coded;
  k.name = "coded-2x2";
  k.diameter_sensor_px = diameter_sensor_px;
  k.raster = rasterize_disk(0.5 * diameter_sensor_px * sensor_block, /*coded=*/true);
  normalize_unit_sum(k.raster);
  return k;
}

BlurKernel make_explicit(const ImageGrid& raster, const std::string& name) {
  require(raster.square(), ErrorCode::DimensionMismatch, "kernel raster must be square");
  require(raster.width % 2 == 1, ErrorCode::OddLength, "kernel raster side must be odd");
  for (double v : raster.values)
    require(v >= 0.0, ErrorCode::InvalidArgument, "kernel raster entries must be >= 0");
  BlurKernel k;
  k.kind = KernelKind::Explicit;
  k.name = name;
  k.diameter_sensor_px = 0.0;
  k.raster = raster;
  normalize_unit_sum(k.raster);
  return k;
}

bool same_kernel(const BlurKernel& a, const BlurKernel& b) {
  if (!a.raster.same_shape(b.raster)) return false;
  for (std::size_t i = 0; i < a.raster.values.size(); ++i)
    if (a.raster.values[i] != b.raster.values[i]) return false;
  return true;
}

}  // namespace maskblur
