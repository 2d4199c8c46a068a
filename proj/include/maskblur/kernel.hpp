#pragma once

#include <string>

#include "maskblur/image.hpp"

namespace maskblur {

enum class KernelKind { InFocus, Disk, Coded, Explicit };

/// Discrete blur kernel sampled on the scene grid. The raster is square with
/// odd side, non-negative, and normalised to unit sum so blurring preserves
/// the mean of a constant image.
struct BlurKernel {
  KernelKind kind = KernelKind::InFocus;
  std::string name = "infocus";
  double diameter_sensor_px = 0.0;  // nominal defocus disk diameter in sensor pixels
  ImageGrid raster;                 // odd side, sums to 1

  int side() const { return raster.width; }
};

/// Identity kernel (1x1 unit raster); blurring with it is a no-op.
BlurKernel make_in_focus();

/// Uniform disk of the given diameter in sensor pixels, rasterised on the
/// scene grid (`sensor_block` scene pixels per sensor pixel) by area sampling.
BlurKernel make_disk(double diameter_sensor_px, int sensor_block);

/// Disk with a 2x2 diagonal on/off code applied over its quadrants, giving a
/// structured (non-radially-symmetric) defocus shape.
BlurKernel make_coded_quadrant(double diameter_sensor_px, int sensor_block);

/// Wraps a caller-provided raster: validates odd square side and
/// non-negativity, then normalises to unit sum.
BlurKernel make_explicit(const ImageGrid& raster, const std::string& name);

bool same_kernel(const BlurKernel& a, const BlurKernel& b);

}  // namespace maskblur
