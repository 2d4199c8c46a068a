#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "maskblur/image.hpp"

namespace maskblur {

struct QualityReport {
  double mse = 0.0;
  double relative_error = 0.0;  // ||estimate - truth|| / ||truth||
  double psnr_db = 0.0;         // 10*log10(peak^2/mse), capped at 300 dB
  double ssim = 1.0;
};

/// MSE, relative error, PSNR (peak = truth maximum), and mean SSIM over an
/// 11x11 Gaussian window (sigma 1.5, stabilisers K1=0.01, K2=0.03, dynamic
/// range = truth maximum), evaluated where the window fits entirely.
QualityReport quality(const ImageGrid& estimate, const ImageGrid& truth);

/// Divides by the background normalised to its own maximum. Pixels whose
/// normalised background falls below dark_eps pass through unscaled; their
/// indices are reported through `flagged` when non-null.
ImageGrid illumination_correct(const ImageGrid& estimate, const ImageGrid& background,
                               double dark_eps = 0.05,
                               std::vector<std::uint32_t>* flagged = nullptr);

struct TrimRect {
  int left = 0, right = 0, top = 0, bottom = 0;
  int total() const { return left + right + top + bottom; }
};

struct RegisterResult {
  ImageGrid aligned_truth;  // trimmed + resampled to the estimate's shape
  TrimRect trim;
  double mse = 0.0;
};

/// Exhaustive search over per-side trims of the high-resolution truth
/// (0..max_trim_px each), box-resampling each crop to the estimate's
/// resolution and scoring by MSE. Smallest total trim wins ties.
RegisterResult register_crop(const ImageGrid& truth_hi, const ImageGrid& estimate,
                             int max_trim_px);

struct MTFCurve {
  std::vector<double> radii;        // px
  std::vector<double> frequencies;  // line pairs per px
  std::vector<double> contrasts;    // in [0, 1]
  std::pair<double, double> target_center{0.0, 0.0};
};

/// Samples circles about `center` with bilinear interpolation (arc step
/// <= 0.5 px), splits each circle into the `spokes` bright/dark periods, and
/// averages the per-period Michelson contrast (Imax-Imin)/(Imax+Imin).
/// Frequency at radius r is spokes / (2*pi*r).
MTFCurve mtf_fan(const ImageGrid& image, std::pair<double, double> center,
                 const std::vector<double>& radii, int spokes);

/// Binary sector-star test chart: pixel bright (255) iff
/// floor(spokes * theta / pi) is even, theta the polar angle about the image
/// center ((side-1)/2, (side-1)/2) in [0, 2*pi).
ImageGrid render_fan_target(int side, int spokes);

/// Catmull-Rom bicubic resample to an arbitrary size (border clamped).
ImageGrid bicubic_resize(const ImageGrid& img, int out_width, int out_height);

/// Box (area-weighted) resample of a sub-rectangle to an arbitrary size.
ImageGrid area_resample(const ImageGrid& img, int x0, int y0, int crop_w, int crop_h,
                        int out_width, int out_height);

}  // namespace maskblur
