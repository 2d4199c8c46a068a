#include "maskblur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace maskblur {

namespace {

constexpr double kPsnrCapDb = 300.0;

// 11x11 Gaussian window, sigma 1.5, normalised to unit sum.
struct SsimWindow {
  static constexpr int kSide = 11;
  double w[kSide][kSide];

  SsimWindow() {
    const double sigma = 1.5;
    double total = 0.0;
    for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kSide; ++c) {
        const double dr = r - (kSide - 1) / 2.0;
        const double dc = c - (kSide - 1) / 2.0;
        w[r][c] = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        total += w[r][c];
      }
    }
    for (int r = 0; r < kSide; ++r)
      for (int c = 0; c < kSide; ++c) w[r][c] /= total;
  }
};

double ssim_mean(const ImageGrid& a, const ImageGrid& b, double dynamic_range) {
  static const SsimWindow window;
  const double L = (dynamic_range > 0.0) ? dynamic_range : 1.0;
  const double c1 = (0.01 * L) * (0.01 * L);
  const double c2 = (0.03 * L) * (0.03 * L);

  const int side = SsimWindow::kSide;
  const int half = side / 2;
  // Windows must fit entirely; small images fall back to one uniform window.
  if (a.width < side || a.height < side) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      ma += a.values[i];
      mb += b.values[i];
    }
    const double n = static_cast<double>(a.values.size());
    ma /= n;
    mb /= n;
    double va = 0.0, vb = 0.0, vab = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      va += (a.values[i] - ma) * (a.values[i] - ma);
      vb += (b.values[i] - mb) * (b.values[i] - mb);
      vab += (a.values[i] - ma) * (b.values[i] - mb);
    }
    va /= n;
    vb /= n;
    vab /= n;
    return ((2 * ma * mb + c1) * (2 * vab + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }

  double total = 0.0;
  long long count = 0;
  for (int r = half; r < a.height - half; ++r) {
    for (int c = half; c < a.width - half; ++c) {
      double ma = 0.0, mb = 0.0;
      for (int wr = 0; wr < side; ++wr)
        for (int wc = 0; wc < side; ++wc) {
          const double wt = window.w[wr][wc];
          ma += wt * a.at(r + wr - half, c + wc - half);
          mb += wt * b.at(r + wr - half, c + wc - half);
        }
      double va = 0.0, vb = 0.0, vab = 0.0;
      for (int wr = 0; wr < side; ++wr)
        for (int wc = 0; wc < side; ++wc) {
          const double wt = window.w[wr][wc];
          const double da = a.at(r + wr - half, c + wc - half) - ma;
          const double db = b.at(r + wr - half, c + wc - half) - mb;
          va += wt * da * da;
          vb += wt * db * db;
          vab += wt * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * vab + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double bilinear_sample(const ImageGrid& img, double row, double col) {
  const int r0 = static_cast<int>(std::floor(row));
  const int c0 = static_cast<int>(std::floor(col));
  const double fr = row - r0;
  const double fc = col - c0;
  double acc = 0.0;
  const double w[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
  const int rr[4] = {r0, r0, r0 + 1, r0 + 1};
  const int cc[4] = {c0, c0 + 1, c0, c0 + 1};
  for (int i = 0; i < 4; ++i) {
    if (w[i] == 0.0) continue;
    if (rr[i] < 0 || rr[i] >= img.height || cc[i] < 0 || cc[i] >= img.width) continue;
    acc += w[i] * img.at(rr[i], cc[i]);
  }
  return acc;
}

}  // namespace

QualityReport quality(const ImageGrid& estimate, const ImageGrid& truth) {
  require(estimate.same_shape(truth), ErrorCode::DimensionMismatch,
          "estimate and truth differ in shape");
  require(!truth.values.empty(), ErrorCode::InvalidArgument, "empty images");

  QualityReport report;
  double err2 = 0.0, truth2 = 0.0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const double d = estimate.values[i] - truth.values[i];
    err2 += d * d;
    truth2 += truth.values[i] * truth.values[i];
  }
  const double n = static_cast<double>(truth.values.size());
  report.mse = err2 / n;
  report.relative_error =
      (truth2 > 0.0) ? std::sqrt(err2 / truth2)
                     : (err2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);

  const double peak = max_value(truth);
  if (report.mse == 0.0) {
    report.psnr_db = kPsnrCapDb;
  } else {
    report.psnr_db = 10.0 * std::log10(peak * peak / report.mse);
    report.psnr_db = std::min(report.psnr_db, kPsnrCapDb);
  }
  report.ssim = ssim_mean(estimate, truth, peak);
  return report;
}

ImageGrid illumination_correct(const ImageGrid& estimate, const ImageGrid& background,
                               double dark_eps, std::vector<std::uint32_t>* flagged) {
  require(estimate.same_shape(background), ErrorCode::DimensionMismatch,
          "estimate and background differ in shape");
  const double bmax = max_value(background);
  require(bmax > 0.0, ErrorCode::AllDarkBackground, "background has no positive entries");
  if (flagged) flagged->clear();

  ImageGrid out = estimate;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double bn = background.values[i] / bmax;
    if (bn < dark_eps) {
      if (flagged) flagged->push_back(static_cast<std::uint32_t>(i));
      continue;  // too dark to correct; pass through
    }
    out.values[i] = estimate.values[i] / bn;
  }
  return out;
}

ImageGrid area_resample(const ImageGrid& img, int x0, int y0, int crop_w, int crop_h,
                        int out_width, int out_height) {
  require(crop_w >= 1 && crop_h >= 1 && out_width >= 1 && out_height >= 1,
          ErrorCode::InvalidArgument, "resample sizes must be positive");
  require(x0 >= 0 && y0 >= 0 && x0 + crop_w <= img.width && y0 + crop_h <= img.height,
          ErrorCode::InvalidArgument, "crop exceeds image bounds");

  const double sx = static_cast<double>(crop_w) / out_width;
  const double sy = static_cast<double>(crop_h) / out_height;
  ImageGrid out(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    const double ry0 = y0 + r * sy;
    const double ry1 = y0 + (r + 1) * sy;
    const int iy0 = static_cast<int>(std::floor(ry0));
    const int iy1 = std::min(static_cast<int>(std::ceil(ry1)), y0 + crop_h);
    for (int c = 0; c < out_width; ++c) {
      const double rx0 = x0 + c * sx;
      const double rx1 = x0 + (c + 1) * sx;
      const int ix0 = static_cast<int>(std::floor(rx0));
      const int ix1 = std::min(static_cast<int>(std::ceil(rx1)), x0 + crop_w);
      double acc = 0.0;
      for (int iy = iy0; iy < iy1; ++iy) {
        const double wy = std::min(ry1, static_cast<double>(iy + 1)) -
                          std::max(ry0, static_cast<double>(iy));
        if (wy <= 0.0) continue;
        for (int ix = ix0; ix < ix1; ++ix) {
          const double wx = std::min(rx1, static_cast<double>(ix + 1)) -
                            std::max(rx0, static_cast<double>(ix));
          if (wx <= 0.0) continue;
          acc += wy * wx * img.at(iy, ix);
        }
      }
      out.at(r, c) = acc / (sx * sy);
    }
  }
  return out;
}

RegisterResult register_crop(const ImageGrid& truth_hi, const ImageGrid& estimate,
                             int max_trim_px) {
  require(max_trim_px >= 0, ErrorCode::InvalidArgument, "max_trim_px must be >= 0");
  require(truth_hi.width >= estimate.width && truth_hi.height >= estimate.height,
          ErrorCode::DimensionMismatch, "truth must be at least the estimate's size");
  require(truth_hi.width - 2 * max_trim_px >= estimate.width &&
              truth_hi.height - 2 * max_trim_px >= estimate.height,
          ErrorCode::TrimTooLarge,
          "max_trim_px " + std::to_string(max_trim_px) + " leaves less than the estimate size");

  RegisterResult best;
  bool have_best = false;
  for (int t = 0; t <= max_trim_px; ++t) {
    for (int b = 0; b <= max_trim_px; ++b) {
      for (int l = 0; l <= max_trim_px; ++l) {
        for (int r = 0; r <= max_trim_px; ++r) {
          ImageGrid candidate =
              area_resample(truth_hi, l, t, truth_hi.width - l - r, truth_hi.height - t - b,
                            estimate.width, estimate.height);
          double mse = 0.0;
          for (std::size_t i = 0; i < candidate.values.size(); ++i) {
            const double d = candidate.values[i] - estimate.values[i];
            mse += d * d;
          }
          mse /= static_cast<double>(candidate.values.size());
          const TrimRect trim{l, r, t, b};
          const bool better =
              !have_best || mse < best.mse ||
              (mse == best.mse && trim.total() < best.trim.total());
          if (better) {
            best.aligned_truth = std::move(candidate);
            best.trim = trim;
            best.mse = mse;
            have_best = true;
          }
        }
      }
    }
  }
  return best;
}

MTFCurve mtf_fan(const ImageGrid& image, std::pair<double, double> center,
                 const std::vector<double>& radii, int spokes) {
  require(spokes >= 2, ErrorCode::InvalidArgument, "need at least two spoke pairs");
  require(!radii.empty(), ErrorCode::InvalidArgument, "need at least one radius");
  const double cx = center.first;
  const double cy = center.second;

  MTFCurve curve;
  curve.target_center = center;
  for (double radius : radii) {
    require(radius > 0.0, ErrorCode::RadiusOutOfBounds, "radius must be positive");
    require(cx - radius >= 0.0 && cy - radius >= 0.0 && cx + radius <= image.width - 1 &&
                cy + radius <= image.height - 1,
            ErrorCode::RadiusOutOfBounds,
            "circle of radius " + std::to_string(radius) + " leaves the image");

    const double period = 2.0 * std::numbers::pi / spokes;
    // Arc step <= 0.5 px and at least 16 samples per period so the extrema
    // of each bright/dark pair are located reliably.
    const int per_period =
        std::max(16, static_cast<int>(std::ceil(radius * period / 0.5)));
    double contrast_sum = 0.0;
    for (int j = 0; j < spokes; ++j) {
      double imax = -std::numeric_limits<double>::infinity();
      double imin = std::numeric_limits<double>::infinity();
      for (int s = 0; s < per_period; ++s) {
        const double theta = (j + static_cast<double>(s) / per_period) * period;
        const double col = cx + radius * std::cos(theta);
        const double row = cy + radius * std::sin(theta);
        // Reconstructions can dip below zero; intensities are clamped so the
        // Michelson contrast stays in [0, 1].
        const double v = std::max(0.0, bilinear_sample(image, row, col));
        imax = std::max(imax, v);
        imin = std::min(imin, v);
      }
      const double denom = imax + imin;
      contrast_sum += (denom > 0.0) ? (imax - imin) / denom : 0.0;
    }
    curve.radii.push_back(radius);
    curve.frequencies.push_back(spokes / (2.0 * std::numbers::pi * radius));
    curve.contrasts.push_back(contrast_sum / spokes);
  }
  return curve;
}

ImageGrid render_fan_target(int side, int spokes) {
  require(side >= 32, ErrorCode::InvalidArgument, "target side must be >= 32");
  require(spokes >= 2, ErrorCode::InvalidArgument, "need at least two spoke pairs");
  const double cx = 0.5 * (side - 1);
  const double cy = 0.5 * (side - 1);
  ImageGrid out(side, side);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      double theta = std::atan2(r - cy, c - cx);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      const long long sector = static_cast<long long>(std::floor(spokes * theta / std::numbers::pi));
      out.at(r, c) = (sector % 2 == 0) ? 255.0 : 0.0;
    }
  }
  return out;
}

namespace {

// Catmull-Rom weight for |t| <= 2.
inline double catmull_rom(double t) {
  t = std::abs(t);
  if (t <= 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
  if (t < 2.0) return (((-0.5 * t + 2.5) * t) - 4.0) * t + 2.0;
  return 0.0;
}

}  // namespace

ImageGrid bicubic_resize(const ImageGrid& img, int out_width, int out_height) {
  require(out_width >= 1 && out_height >= 1, ErrorCode::InvalidArgument,
          "output size must be positive");
  const double sx = static_cast<double>(img.width) / out_width;
  const double sy = static_cast<double>(img.height) / out_height;
  ImageGrid out(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    const double src_r = (r + 0.5) * sy - 0.5;
    const int r0 = static_cast<int>(std::floor(src_r));
    for (int c = 0; c < out_width; ++c) {
      const double src_c = (c + 0.5) * sx - 0.5;
      const int c0 = static_cast<int>(std::floor(src_c));
      double acc = 0.0;
      for (int dr = -1; dr <= 2; ++dr) {
        const int rr = std::clamp(r0 + dr, 0, img.height - 1);
        const double wr = catmull_rom(src_r - (r0 + dr));
        for (int dc = -1; dc <= 2; ++dc) {
          const int cc = std::clamp(c0 + dc, 0, img.width - 1);
          acc += wr * catmull_rom(src_c - (c0 + dc)) * img.at(rr, cc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace maskblur
